#include "linkcloze/prompting.hpp"

#include <algorithm>
#include <set>

#include "linkcloze/errors.hpp"
#include "linkcloze/kvconfig.hpp"

namespace linkcloze {

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::vector<int> to_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

// [CLS] issue : D [SEP] commit : M [SPE] C [SEP] T
PromptedInput assemble(std::vector<int> description, std::vector<int> message, std::vector<int> code,
                       const std::vector<int>& template_ids, const Vocabulary& vocab,
                       std::size_t max_len) {
  const std::size_t skeleton = 8 + template_ids.size();
  if (skeleton > max_len) {
    throw BudgetError("max_len " + std::to_string(max_len) + " cannot hold the " +
                      std::to_string(skeleton) + "-token prompt skeleton");
  }
  const std::size_t budget = max_len - skeleton;
  std::size_t overflow = description.size() + message.size() + code.size();
  overflow = overflow > budget ? overflow - budget : 0;

  PromptedInput out;
  auto cut = [&overflow](std::vector<int>& segment) {
    const std::size_t n = std::min(overflow, segment.size());
    segment.resize(segment.size() - n);
    overflow -= n;
    return n;
  };
  out.truncation.code = cut(code);
  out.truncation.message = cut(message);
  out.truncation.description = cut(description);

  auto& ids = out.token_ids;
  ids.reserve(max_len);
  ids.push_back(Vocabulary::kCls);
  ids.push_back(vocab.id("issue"));
  ids.push_back(vocab.id(":"));
  ids.insert(ids.end(), description.begin(), description.end());
  ids.push_back(Vocabulary::kSep);
  ids.push_back(vocab.id("commit"));
  ids.push_back(vocab.id(":"));
  ids.insert(ids.end(), message.begin(), message.end());
  ids.push_back(Vocabulary::kSpe);
  ids.insert(ids.end(), code.begin(), code.end());
  ids.push_back(Vocabulary::kSep);
  const std::size_t template_start = ids.size();
  ids.insert(ids.end(), template_ids.begin(), template_ids.end());
  const auto mask = std::find(ids.begin() + static_cast<std::ptrdiff_t>(template_start), ids.end(),
                              Vocabulary::kMask);
  out.mask_position = static_cast<std::size_t>(mask - ids.begin());
  return out;
}

std::vector<int> template_ids(std::string_view text, const Vocabulary& vocab) {
  auto ids = to_ids(tokenize_text(text, true), vocab);
  if (std::count(ids.begin(), ids.end(), Vocabulary::kMask) != 1) {
    throw ConfigError("template must contain exactly one [MASK]");
  }
  return ids;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string id, std::string text) : id_(std::move(id)), text_(std::move(text)) {
  if (text_.empty()) throw ConfigError("template '" + id_ + "' has empty text");
  if (count_occurrences(text_, kMaskMarker) != 1) {
    throw ConfigError("template '" + id_ + "' must contain exactly one [MASK]");
  }
}

Verbalizer::Verbalizer(std::vector<std::string> positive_words, std::vector<std::string> negative_words)
    : positive_(std::move(positive_words)), negative_(std::move(negative_words)) {
  if (positive_.empty() || negative_.empty()) throw ConfigError("verbalizer word sets must be non-empty");
  for (const auto& w : positive_) {
    if (std::find(negative_.begin(), negative_.end(), w) != negative_.end()) {
      throw ConfigError("verbalizer word '" + w + "' is both positive and negative");
    }
  }
}

VerbalizerIds resolve(const Verbalizer& verbalizer, const Vocabulary& vocab) {
  auto lookup = [&vocab](const std::string& word) {
    const auto tokens = tokenize_text(word);
    if (tokens.empty()) throw ConfigError("verbalizer word '" + word + "' has no tokens");
    auto id = vocab.find(tokens.front());
    if (!id) throw ConfigError("verbalizer word '" + word + "' is not in the vocabulary");
    return *id;
  };
  VerbalizerIds ids;
  for (const auto& w : verbalizer.positive_words()) ids.positive.push_back(lookup(w));
  for (const auto& w : verbalizer.negative_words()) ids.negative.push_back(lookup(w));
  for (int id : ids.positive) {
    if (std::find(ids.negative.begin(), ids.negative.end(), id) != ids.negative.end()) {
      throw ConfigError("verbalizer sets share token '" + vocab.token(id) + "'");
    }
  }
  return ids;
}

std::vector<PromptTemplate> default_templates() {
  return {PromptTemplate("single1", "The link is [MASK]"),
          PromptTemplate("single2", "The answer between issue and commit is [MASK]"),
          PromptTemplate("single3", "Does the commit answer the issue? [MASK]")};
}

std::string render(const IssueArtifact& issue, const CommitArtifact& commit, const PromptTemplate& prompt) {
  std::string out;
  out.reserve(48 + issue.description.size() + commit.message.size() + commit.code.size() +
              prompt.text().size());
  out += "[CLS] Issue: ";
  out += issue.description;
  out += " [SEP] Commit: ";
  out += commit.message;
  out += " [SPE] ";
  out += commit.code;
  out += " [SEP] ";
  out += prompt.text();
  return out;
}

PromptedInput tokenize_and_truncate(std::string_view rendered, const Vocabulary& vocab, std::size_t max_len) {
  if (count_occurrences(rendered, kMaskMarker) != 1) {
    throw ConfigError("rendered prompt must contain exactly one [MASK]");
  }
  constexpr std::string_view kHead = "[CLS] Issue:";
  constexpr std::string_view kCommit = "Commit:";
  const auto head = rendered.find(kHead);
  if (head == std::string_view::npos) throw ParseError("rendered prompt lacks '[CLS] Issue:'", 0);
  const auto desc_begin = head + kHead.size();
  const auto sep1 = rendered.find(Vocabulary::kSepToken, desc_begin);
  if (sep1 == std::string_view::npos) throw ParseError("rendered prompt lacks issue separator", 0);
  const auto commit = rendered.find(kCommit, sep1);
  if (commit == std::string_view::npos) throw ParseError("rendered prompt lacks 'Commit:'", 0);
  const auto msg_begin = commit + kCommit.size();
  const auto spe = rendered.find(Vocabulary::kSpeToken, msg_begin);
  if (spe == std::string_view::npos) throw ParseError("rendered prompt lacks [SPE]", 0);
  const auto sep2 = rendered.rfind(Vocabulary::kSepToken);
  if (sep2 == std::string_view::npos || sep2 < spe) throw ParseError("rendered prompt lacks template separator", 0);

  const auto code_begin = spe + Vocabulary::kSpeToken.size();
  auto ids_of = [&](std::size_t begin, std::size_t end) {
    return to_ids(tokenize_text(rendered.substr(begin, end - begin)), vocab);
  };
  return assemble(ids_of(desc_begin, sep1), ids_of(msg_begin, spe), ids_of(code_begin, sep2),
                  template_ids(rendered.substr(sep2 + Vocabulary::kSepToken.size()), vocab), vocab,
                  max_len);
}

PromptedInput build_prompt(const IssueArtifact& issue, const CommitArtifact& commit,
                           const PromptTemplate& prompt, const Vocabulary& vocab, std::size_t max_len) {
  return assemble(to_ids(tokenize_text(issue.description), vocab),
                  to_ids(tokenize_text(commit.message), vocab), to_ids(tokenize_text(commit.code), vocab),
                  template_ids(prompt.text(), vocab), vocab, max_len);
}

Vocabulary build_vocabulary(const Corpus& corpus, std::span<const PromptTemplate> templates,
                            const Verbalizer& verbalizer) {
  std::vector<std::string> texts{"Issue: Commit:"};
  for (const auto& i : corpus.issues()) texts.push_back(i.description);
  for (const auto& c : corpus.commits()) {
    texts.push_back(c.message);
    texts.push_back(c.code);
  }
  for (const auto& t : templates) texts.push_back(t.text());
  for (const auto& w : verbalizer.positive_words()) texts.push_back(w);
  for (const auto& w : verbalizer.negative_words()) texts.push_back(w);
  return build_vocabulary(texts);
}

PromptConfig load_prompt_config(const std::filesystem::path& path) {
  const auto kv = KeyValueConfig::load(path);
  PromptConfig config;
  config.templates.clear();
  std::set<std::string> seen;
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("template.", 0) == 0) {
      auto id = key.substr(9);
      if (!seen.insert(id).second) throw ConfigError("duplicate template '" + id + "'");
      config.templates.emplace_back(std::move(id), value);
    }
  }
  if (config.templates.empty()) config.templates = default_templates();
  auto pos = kv.get("verbalizer.positive");
  auto neg = kv.get("verbalizer.negative");
  if (pos || neg) {
    const auto fallback = Verbalizer::default_verbalizer();
    config.verbalizer = Verbalizer(pos ? split_list(*pos) : fallback.positive_words(),
                                   neg ? split_list(*neg) : fallback.negative_words());
  }
  return config;
}

}  // namespace linkcloze
