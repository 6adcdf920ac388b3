#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace linkcloze {

// Dense token <-> id map. Ids 0..5 are always the special tokens.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kSpe = 4;
  static constexpr int kMask = 5;

  static constexpr std::string_view kPadToken = "[PAD]";
  static constexpr std::string_view kUnkToken = "[UNK]";
  static constexpr std::string_view kClsToken = "[CLS]";
  static constexpr std::string_view kSepToken = "[SEP]";
  static constexpr std::string_view kSpeToken = "[SPE]";
  static constexpr std::string_view kMaskToken = "[MASK]";

  static std::span<const std::string_view> special_tokens();

  Vocabulary();

  // Rebuilds from an id-ordered token list (as stored in a checkpoint).
  static Vocabulary from_tokens(std::span<const std::string> tokens);

  // Returns the existing id when already present.
  int add(std::string_view token);

  std::optional<int> find(std::string_view token) const;
  // Unknown tokens map to kUnk.
  int id(std::string_view token) const;
  const std::string& token(int id) const;
  bool contains_id(int id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < tokens_.size(); }

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> ids_;
};

// Lowercasing whitespace/punctuation splitter used by the reference backend.
// With recognise_specials the six bracketed markers are kept whole;
// otherwise they split like any other punctuation.
std::vector<std::string> tokenize_text(std::string_view text, bool recognise_specials = false);

// Specials first, then every distinct token of `texts` in lexicographic order.
Vocabulary build_vocabulary(std::span<const std::string> texts);

}  // namespace linkcloze
