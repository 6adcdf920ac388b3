#include "linkcloze/vocabulary.hpp"

#include <array>
#include <cctype>
#include <set>

#include "linkcloze/errors.hpp"

namespace linkcloze {

namespace {

constexpr std::array<std::string_view, 6> kSpecials = {
    Vocabulary::kPadToken, Vocabulary::kUnkToken, Vocabulary::kClsToken,
    Vocabulary::kSepToken, Vocabulary::kSpeToken, Vocabulary::kMaskToken};

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

}  // namespace

std::span<const std::string_view> Vocabulary::special_tokens() { return kSpecials; }

Vocabulary::Vocabulary() {
  for (auto t : kSpecials) add(t);
}

Vocabulary Vocabulary::from_tokens(std::span<const std::string> tokens) {
  if (tokens.size() < kSpecials.size()) throw VocabularyError("vocabulary is missing special tokens");
  for (std::size_t i = 0; i < kSpecials.size(); ++i) {
    if (tokens[i] != kSpecials[i]) throw VocabularyError("special token out of place: " + tokens[i]);
  }
  Vocabulary v;
  for (std::size_t i = kSpecials.size(); i < tokens.size(); ++i) {
    if (v.find(tokens[i])) throw VocabularyError("duplicate token '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  return v;
}

int Vocabulary::add(std::string_view token) {
  if (auto found = find(token)) return *found;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(std::string(token), id);
  return id;
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::id(std::string_view token) const { return find(token).value_or(kUnk); }

const std::string& Vocabulary::token(int id) const {
  if (!contains_id(id)) throw VocabularyError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> tokenize_text(std::string_view text, bool recognise_specials) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (recognise_specials && text[i] == '[') {
      bool matched = false;
      for (auto s : kSpecials) {
        if (text.substr(i, s.size()) == s) {
          flush();
          out.emplace_back(s);
          i += s.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    }
    ++i;
  }
  flush();
  return out;
}

Vocabulary build_vocabulary(std::span<const std::string> texts) {
  std::set<std::string> seen;
  for (const auto& text : texts) {
    for (auto& t : tokenize_text(text, true)) seen.insert(std::move(t));
  }
  Vocabulary v;
  for (const auto& t : seen) v.add(t);
  return v;
}

}  // namespace linkcloze
