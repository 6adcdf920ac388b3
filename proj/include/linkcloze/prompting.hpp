#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linkcloze/corpus.hpp"
#include "linkcloze/vocabulary.hpp"

namespace linkcloze {

inline constexpr std::string_view kMaskMarker = "[MASK]";
inline constexpr std::size_t kDefaultMaxLength = 512;

// Natural-language scaffold with exactly one "[MASK]".
class PromptTemplate {
 public:
  // Throws ConfigError unless `text` is non-empty with a single mask marker.
  PromptTemplate(std::string id, std::string text);

  const std::string& id() const noexcept { return id_; }
  const std::string& text() const noexcept { return text_; }

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;

 private:
  std::string id_;
  std::string text_;
};

// Label words: the positive set scores "linked", the negative set "not linked".
class Verbalizer {
 public:
  // Throws ConfigError on an empty set or a word present in both sets.
  Verbalizer(std::vector<std::string> positive_words, std::vector<std::string> negative_words);

  static Verbalizer default_verbalizer() { return Verbalizer({"correct"}, {"incorrect"}); }

  const std::vector<std::string>& positive_words() const noexcept { return positive_; }
  const std::vector<std::string>& negative_words() const noexcept { return negative_; }

  friend bool operator==(const Verbalizer&, const Verbalizer&) = default;

 private:
  std::vector<std::string> positive_;
  std::vector<std::string> negative_;
};

// Verbalizer words resolved to token ids of one vocabulary.
struct VerbalizerIds {
  std::vector<int> positive;
  std::vector<int> negative;
};

// Each word maps to its first sub-token. Throws ConfigError when a word is
// unknown to the vocabulary or both sets resolve to a shared id.
VerbalizerIds resolve(const Verbalizer& verbalizer, const Vocabulary& vocab);

std::vector<PromptTemplate> default_templates();

// "[CLS] Issue: {description} [SEP] Commit: {message} [SPE] {code} [SEP] {template}"
std::string render(const IssueArtifact& issue, const CommitArtifact& commit,
                   const PromptTemplate& prompt);

struct TruncationReport {
  std::size_t description = 0;
  std::size_t message = 0;
  std::size_t code = 0;

  std::size_t total() const noexcept { return description + message + code; }
  friend bool operator==(const TruncationReport&, const TruncationReport&) = default;
};

struct PromptedInput {
  std::vector<int> token_ids;
  std::size_t mask_position = 0;
  TruncationReport truncation;
};

// Tokenises a rendered prompt and fits it into max_len. The skeleton
// (special tokens, segment labels, template) is never cut; overflow comes
// off segment tails in the order code, message, description.
// Throws BudgetError when the skeleton alone exceeds max_len.
PromptedInput tokenize_and_truncate(std::string_view rendered, const Vocabulary& vocab,
                                    std::size_t max_len = kDefaultMaxLength);

// Structured equivalent of tokenize_and_truncate(render(...)) that does not
// re-parse segment boundaries, so artifact text may contain bracket markers.
PromptedInput build_prompt(const IssueArtifact& issue, const CommitArtifact& commit,
                           const PromptTemplate& prompt, const Vocabulary& vocab,
                           std::size_t max_len = kDefaultMaxLength);

// Vocabulary covering every artifact, template and label word.
Vocabulary build_vocabulary(const Corpus& corpus, std::span<const PromptTemplate> templates,
                            const Verbalizer& verbalizer);

struct PromptConfig {
  std::vector<PromptTemplate> templates = default_templates();
  Verbalizer verbalizer = Verbalizer::default_verbalizer();
};

// Key-value file: `template.<id> = text` entries (in file order) and
// `verbalizer.positive` / `verbalizer.negative` as comma separated words.
// Missing sections fall back to the defaults.
PromptConfig load_prompt_config(const std::filesystem::path& path);

}  // namespace linkcloze
