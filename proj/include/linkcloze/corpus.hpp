#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace linkcloze {

struct IssueArtifact {
  std::string issue_id;
  std::string description;

  friend bool operator==(const IssueArtifact&, const IssueArtifact&) = default;
};

struct CommitArtifact {
  std::string commit_id;
  std::string message;
  std::string code;

  friend bool operator==(const CommitArtifact&, const CommitArtifact&) = default;
};

// label 1 = linked, 0 = not linked.
struct LinkExample {
  std::string issue_id;
  std::string commit_id;
  int label = 0;

  friend bool operator==(const LinkExample&, const LinkExample&) = default;
};

// Artifacts plus labelled links. Insertion order is preserved so that
// serialisation is stable.
class Corpus {
 public:
  void add_issue(IssueArtifact issue);
  void add_commit(CommitArtifact commit);
  // Artifacts must already be present.
  void add_link(LinkExample link);

  const IssueArtifact& issue(std::string_view id) const;
  const CommitArtifact& commit(std::string_view id) const;
  bool has_issue(std::string_view id) const;
  bool has_commit(std::string_view id) const;
  bool has_pair(std::string_view issue_id, std::string_view commit_id) const;

  const std::vector<IssueArtifact>& issues() const noexcept { return issues_; }
  const std::vector<CommitArtifact>& commits() const noexcept { return commits_; }
  const std::vector<LinkExample>& links() const noexcept { return links_; }

  std::size_t true_link_count() const noexcept;
  std::size_t false_link_count() const noexcept { return links_.size() - true_link_count(); }

 private:
  std::vector<IssueArtifact> issues_;
  std::vector<CommitArtifact> commits_;
  std::vector<LinkExample> links_;
  std::map<std::string, std::size_t, std::less<>> issue_index_;
  std::map<std::string, std::size_t, std::less<>> commit_index_;
  std::set<std::pair<std::string, std::string>> pairs_;
};

// JSON-Lines reader. Records may appear in any order; references are
// checked once the whole stream has been read.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

// Writes issues, then commits, then links, one record per line.
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// A corpus holding only the given links and the artifacts they reference.
Corpus restrict_to(const Corpus& source, std::span<const LinkExample> links);

// Samples floor(ratio * #true links) unlabelled pairs uniformly from the
// issue x commit cross product, excluding every pair the corpus already
// labels. Deterministic for a fixed seed.
std::vector<LinkExample> generate_negatives(const Corpus& corpus, double ratio, std::uint64_t seed);

struct DatasetSplit {
  std::vector<LinkExample> train;
  std::vector<LinkExample> valid;
  std::vector<LinkExample> test;
  std::uint64_t seed = 0;
};

struct SplitOptions {
  // Keep every link of an issue inside one partition. Off by default.
  bool group_by_issue = false;
};

// Seeded shuffle, then floor(0.8n) train, floor(0.1n) valid, rest test.
DatasetSplit split(std::span<const LinkExample> examples, std::uint64_t seed,
                   SplitOptions options = {});

}  // namespace linkcloze
