#pragma once

#include <cstdint>

#include "linkcloze/corpus.hpp"

namespace linkcloze {

// Issue/commit pairs whose true links share words between the issue
// description and the commit message: the message opens with the first
// shared_words words of the description, in order. With the defaults the
// message is a copy of the description. Negatives are sampled pairs.
struct OverlapCorpusSpec {
  std::size_t word_pool = 500;
  std::size_t true_links = 500;
  double negative_ratio = 3.0;
  std::size_t description_words = 8;
  std::size_t message_words = 8;
  std::size_t shared_words = 8;
  std::size_t code_words = 2;
  std::uint64_t seed = 0;
};

Corpus make_overlap_corpus(const OverlapCorpusSpec& spec);

// Random-text corpus with prescribed artifact and link counts (e.g. the
// 239 / 115 / 266 / 866 shape of a small tracker). Every artifact takes
// part in at least one true link when counts allow.
struct ShapedCorpusSpec {
  std::size_t issues = 239;
  std::size_t commits = 115;
  std::size_t true_links = 266;
  std::size_t false_links = 866;
  std::size_t words_per_text = 6;
  std::uint64_t seed = 0;
};

Corpus make_shaped_corpus(const ShapedCorpusSpec& spec);

}  // namespace linkcloze
