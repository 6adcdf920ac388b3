#include "linkcloze/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "linkcloze/errors.hpp"
#include "linkcloze/random.hpp"

namespace linkcloze {

using ordered_json = nlohmann::ordered_json;

void Corpus::add_issue(IssueArtifact issue) {
  if (issue.issue_id.empty()) throw IntegrityError("issue with empty issue_id");
  if (issue_index_.contains(issue.issue_id)) {
    throw IntegrityError("duplicate issue_id '" + issue.issue_id + "'");
  }
  issue_index_.emplace(issue.issue_id, issues_.size());
  issues_.push_back(std::move(issue));
}

void Corpus::add_commit(CommitArtifact commit) {
  if (commit.commit_id.empty()) throw IntegrityError("commit with empty commit_id");
  if (commit_index_.contains(commit.commit_id)) {
    throw IntegrityError("duplicate commit_id '" + commit.commit_id + "'");
  }
  commit_index_.emplace(commit.commit_id, commits_.size());
  commits_.push_back(std::move(commit));
}

void Corpus::add_link(LinkExample link) {
  if (!has_issue(link.issue_id)) {
    throw IntegrityError("link references unknown issue_id '" + link.issue_id + "'");
  }
  if (!has_commit(link.commit_id)) {
    throw IntegrityError("link references unknown commit_id '" + link.commit_id + "'");
  }
  if (link.label != 0 && link.label != 1) {
    throw IntegrityError("link label must be 0 or 1");
  }
  if (!pairs_.emplace(link.issue_id, link.commit_id).second) {
    throw IntegrityError("duplicate link (" + link.issue_id + ", " + link.commit_id + ")");
  }
  links_.push_back(std::move(link));
}

const IssueArtifact& Corpus::issue(std::string_view id) const {
  auto it = issue_index_.find(id);
  if (it == issue_index_.end()) throw IntegrityError("unknown issue_id '" + std::string(id) + "'");
  return issues_[it->second];
}

const CommitArtifact& Corpus::commit(std::string_view id) const {
  auto it = commit_index_.find(id);
  if (it == commit_index_.end()) throw IntegrityError("unknown commit_id '" + std::string(id) + "'");
  return commits_[it->second];
}

bool Corpus::has_issue(std::string_view id) const { return issue_index_.find(id) != issue_index_.end(); }

bool Corpus::has_commit(std::string_view id) const {
  return commit_index_.find(id) != commit_index_.end();
}

bool Corpus::has_pair(std::string_view issue_id, std::string_view commit_id) const {
  return pairs_.contains({std::string(issue_id), std::string(commit_id)});
}

std::size_t Corpus::true_link_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(links_.begin(), links_.end(), [](const LinkExample& l) { return l.label == 1; }));
}

namespace {

std::string required_string(const ordered_json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  struct PendingLink {
    LinkExample link;
    std::size_t line;
  };
  std::vector<PendingLink> pending;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    ordered_json record;
    try {
      record = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line);
    }
    if (!record.is_object()) throw ParseError("record must be a JSON object", line);
    const std::string kind = required_string(record, "kind", line);
    try {
      if (kind == "issue") {
        corpus.add_issue({required_string(record, "issue_id", line),
                          required_string(record, "description", line)});
      } else if (kind == "commit") {
        corpus.add_commit({required_string(record, "commit_id", line),
                           required_string(record, "message", line),
                           required_string(record, "code", line)});
      } else if (kind == "link") {
        auto label = record.find("label");
        if (label == record.end()) throw ParseError("missing field 'label'", line);
        if (!label->is_number_integer() || (label->get<int>() != 0 && label->get<int>() != 1)) {
          throw ParseError("field 'label' must be 0 or 1", line);
        }
        pending.push_back({{required_string(record, "issue_id", line),
                            required_string(record, "commit_id", line), label->get<int>()},
                           line});
      } else {
        throw ParseError("unknown record kind '" + kind + "'", line);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const IntegrityError& e) {
      throw IntegrityError("line " + std::to_string(line) + ": " + e.what());
    }
  }

  for (auto& p : pending) {
    try {
      corpus.add_link(std::move(p.link));
    } catch (const IntegrityError& e) {
      throw IntegrityError("line " + std::to_string(p.line) + ": " + e.what());
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path.string() + "'");
  return parse_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& issue : corpus.issues()) {
    ordered_json r;
    r["kind"] = "issue";
    r["issue_id"] = issue.issue_id;
    r["description"] = issue.description;
    out << r.dump() << '\n';
  }
  for (const auto& commit : corpus.commits()) {
    ordered_json r;
    r["kind"] = "commit";
    r["commit_id"] = commit.commit_id;
    r["message"] = commit.message;
    r["code"] = commit.code;
    out << r.dump() << '\n';
  }
  for (const auto& link : corpus.links()) {
    ordered_json r;
    r["kind"] = "link";
    r["issue_id"] = link.issue_id;
    r["commit_id"] = link.commit_id;
    r["label"] = link.label;
    out << r.dump() << '\n';
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file '" + path.string() + "'");
  write_corpus(corpus, out);
}

Corpus restrict_to(const Corpus& source, std::span<const LinkExample> links) {
  std::unordered_set<std::string> issue_ids;
  std::unordered_set<std::string> commit_ids;
  for (const auto& l : links) {
    issue_ids.insert(l.issue_id);
    commit_ids.insert(l.commit_id);
  }
  Corpus out;
  for (const auto& issue : source.issues()) {
    if (issue_ids.contains(issue.issue_id)) out.add_issue(issue);
  }
  for (const auto& commit : source.commits()) {
    if (commit_ids.contains(commit.commit_id)) out.add_commit(commit);
  }
  for (const auto& l : links) out.add_link(l);
  return out;
}

std::vector<LinkExample> generate_negatives(const Corpus& corpus, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0) || !std::isfinite(ratio)) throw ConfigError("negative ratio must be >= 0");
  const std::size_t positives = corpus.true_link_count();
  // Slack absorbs ratios written as a quotient, e.g. 866.0 / 266.
  const auto wanted = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(positives) + 1e-9));
  if (wanted == 0) return {};

  const std::size_t n_issues = corpus.issues().size();
  const std::size_t n_commits = corpus.commits().size();
  const std::size_t total = n_issues * n_commits;
  const std::size_t taken = corpus.links().size();
  if (wanted > total - taken) {
    throw CapacityError("requested " + std::to_string(wanted) + " negatives but only " +
                        std::to_string(total - taken) + " unlinked pairs exist");
  }

  Rng rng(seed);
  std::vector<LinkExample> out;
  out.reserve(wanted);
  auto make = [&](std::size_t cell) {
    return LinkExample{corpus.issues()[cell / n_commits].issue_id,
                       corpus.commits()[cell % n_commits].commit_id, 0};
  };

  if (wanted * 2 <= total - taken) {
    // Sparse request: rejection sampling over cells.
    std::unordered_set<std::size_t> chosen;
    while (out.size() < wanted) {
      const auto cell = static_cast<std::size_t>(rng.below(total));
      const auto& issue = corpus.issues()[cell / n_commits];
      const auto& commit = corpus.commits()[cell % n_commits];
      if (corpus.has_pair(issue.issue_id, commit.commit_id)) continue;
      if (!chosen.insert(cell).second) continue;
      out.push_back(make(cell));
    }
  } else {
    std::vector<std::size_t> free_cells;
    free_cells.reserve(total - taken);
    for (std::size_t cell = 0; cell < total; ++cell) {
      if (!corpus.has_pair(corpus.issues()[cell / n_commits].issue_id,
                           corpus.commits()[cell % n_commits].commit_id)) {
        free_cells.push_back(cell);
      }
    }
    // Partial Fisher-Yates: the first `wanted` slots are a uniform sample.
    for (std::size_t i = 0; i < wanted; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(free_cells.size() - i));
      std::swap(free_cells[i], free_cells[j]);
      out.push_back(make(free_cells[i]));
    }
  }
  return out;
}

DatasetSplit split(std::span<const LinkExample> examples, std::uint64_t seed, SplitOptions options) {
  const std::size_t n = examples.size();
  if (n < 10) throw SizeError("split needs at least 10 examples, got " + std::to_string(n));
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_valid = n / 10;

  DatasetSplit out;
  out.seed = seed;
  Rng rng(seed);

  if (!options.group_by_issue) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(std::span(order));
    for (std::size_t k = 0; k < n; ++k) {
      const auto& ex = examples[order[k]];
      if (k < n_train) {
        out.train.push_back(ex);
      } else if (k < n_train + n_valid) {
        out.valid.push_back(ex);
      } else {
        out.test.push_back(ex);
      }
    }
    return out;
  }

  // Grouped: shuffle issues (first-seen order), then fill partitions group by group.
  std::vector<std::string> issue_order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = groups.try_emplace(examples[i].issue_id);
    if (inserted) issue_order.push_back(examples[i].issue_id);
    it->second.push_back(i);
  }
  rng.shuffle(std::span(issue_order));
  for (const auto& id : issue_order) {
    auto* target = &out.test;
    if (out.train.size() < n_train) {
      target = &out.train;
    } else if (out.valid.size() < n_valid) {
      target = &out.valid;
    }
    for (auto i : groups[id]) target->push_back(examples[i]);
  }
  return out;
}

}  // namespace linkcloze
