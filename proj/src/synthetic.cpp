#include "linkcloze/synthetic.hpp"

#include <set>

#include "linkcloze/errors.hpp"
#include "linkcloze/random.hpp"

namespace linkcloze {

namespace {

std::string word(std::size_t index) {
  std::string w = "w" + std::to_string(index);
  return w;
}

std::vector<std::size_t> distinct_words(Rng& rng, std::size_t pool, std::size_t count) {
  std::set<std::size_t> seen;
  std::vector<std::size_t> out;
  while (out.size() < count) {
    const auto w = static_cast<std::size_t>(rng.below(pool));
    if (seen.insert(w).second) out.push_back(w);
  }
  return out;
}

std::string join(const std::vector<std::size_t>& words) {
  std::string out;
  for (auto w : words) {
    if (!out.empty()) out += ' ';
    out += word(w);
  }
  return out;
}

std::string code_line(Rng& rng, std::size_t pool, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 2 == 0) {
      out += word(static_cast<std::size_t>(rng.below(pool)));
    } else {
      out += "(" + word(static_cast<std::size_t>(rng.below(pool))) + ");";
    }
    out += ' ';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace

Corpus make_overlap_corpus(const OverlapCorpusSpec& spec) {
  if (spec.shared_words > spec.description_words || spec.shared_words > spec.message_words) {
    throw ConfigError("shared_words exceeds the description or message length");
  }
  if (spec.description_words > spec.word_pool || spec.message_words > spec.word_pool) {
    throw ConfigError("word pool too small for the requested text lengths");
  }
  Rng rng(spec.seed);
  Corpus corpus;
  for (std::size_t k = 0; k < spec.true_links; ++k) {
    const auto description = distinct_words(rng, spec.word_pool, spec.description_words);
    std::vector<std::size_t> message(description.begin(), description.begin() + static_cast<std::ptrdiff_t>(spec.shared_words));
    std::set<std::size_t> used(description.begin(), description.end());
    while (message.size() < spec.message_words) {
      const auto w = static_cast<std::size_t>(rng.below(spec.word_pool));
      if (used.insert(w).second) message.push_back(w);
    }
    corpus.add_issue({"ISSUE-" + std::to_string(k + 1), join(description)});
    corpus.add_commit({"c" + std::to_string(k + 1), join(message), code_line(rng, spec.word_pool, spec.code_words)});
  }
  for (std::size_t k = 0; k < spec.true_links; ++k) {
    corpus.add_link({corpus.issues()[k].issue_id, corpus.commits()[k].commit_id, 1});
  }
  for (auto& negative : generate_negatives(corpus, spec.negative_ratio, rng.next())) {
    corpus.add_link(std::move(negative));
  }
  return corpus;
}

Corpus make_shaped_corpus(const ShapedCorpusSpec& spec) {
  if (spec.issues == 0 || spec.commits == 0) throw ConfigError("shaped corpus needs artifacts");
  if (spec.true_links + spec.false_links > spec.issues * spec.commits) {
    throw CapacityError("more links requested than issue x commit pairs");
  }
  constexpr std::size_t kPool = 2000;
  Rng rng(spec.seed);
  Corpus corpus;
  for (std::size_t i = 0; i < spec.issues; ++i) {
    corpus.add_issue({"ISSUE-" + std::to_string(i + 1), join(distinct_words(rng, kPool, spec.words_per_text))});
  }
  for (std::size_t c = 0; c < spec.commits; ++c) {
    corpus.add_commit({"c" + std::to_string(c + 1), join(distinct_words(rng, kPool, spec.words_per_text)),
                       code_line(rng, kPool, spec.words_per_text)});
  }
  auto link = [&](std::size_t i, std::size_t c) {
    const auto& issue = corpus.issues()[i].issue_id;
    const auto& commit = corpus.commits()[c].commit_id;
    if (corpus.has_pair(issue, commit)) return false;
    corpus.add_link({issue, commit, 1});
    return true;
  };
  // Cover every commit, then every issue, then fill with random pairs.
  for (std::size_t c = 0; c < spec.commits && corpus.links().size() < spec.true_links; ++c) {
    link(c % spec.issues, c);
  }
  for (std::size_t i = spec.commits; i < spec.issues && corpus.links().size() < spec.true_links; ++i) {
    link(i, static_cast<std::size_t>(rng.below(spec.commits)));
  }
  while (corpus.links().size() < spec.true_links) {
    link(static_cast<std::size_t>(rng.below(spec.issues)), static_cast<std::size_t>(rng.below(spec.commits)));
  }
  if (spec.false_links > 0) {
    const double ratio = static_cast<double>(spec.false_links) / static_cast<double>(spec.true_links);
    for (auto& negative : generate_negatives(corpus, ratio, rng.next())) corpus.add_link(std::move(negative));
  }
  return corpus;
}

}  // namespace linkcloze
