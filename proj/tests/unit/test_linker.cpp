#include <doctest.h>

#include <cmath>
#include <numeric>

#include "linkcloze/errors.hpp"
#include "linkcloze/linker.hpp"
#include "linkcloze/objective.hpp"
#include "linkcloze/random.hpp"
#include "support/stub_backend.hpp"

using namespace linkcloze;
using linkcloze::testing::StubBackend;

namespace {

Vocabulary stub_vocab() {
  std::vector<std::string> texts{"Issue: Commit: correct incorrect yes no right wrong", "NPE in logger fix if x null"};
  for (const auto& t : default_templates()) texts.push_back(t.text());
  return build_vocabulary(texts);
}

const IssueArtifact kIssue{"1", "NPE in logger"};
const CommitArtifact kCommit{"a", "fix NPE", "if (x != null)"};

double oracle(const Vector& p, const Verbalizer& v, const Vocabulary& vocab) {
  auto mean = [&](const std::vector<std::string>& words) {
    double s = 0.0;
    for (const auto& w : words) s += p[*vocab.find(w)];
    return s / static_cast<double>(words.size());
  };
  const double pos = mean(v.positive_words());
  const double neg = mean(v.negative_words());
  return pos / (pos + neg);
}

}  // namespace

TEST_CASE("label_probability renormalizes the verbalizer means") {
  const auto vocab = stub_vocab();
  auto probs = [&](std::initializer_list<std::pair<const char*, double>> entries) {
    Vector p = Vector::Zero(static_cast<Eigen::Index>(vocab.size()));
    double used = 0.0;
    for (const auto& [w, v] : entries) {
      p[*vocab.find(w)] = v;
      used += v;
    }
    p[*vocab.find("logger")] = 1.0 - used;
    return p;
  };
  const auto def = Verbalizer::default_verbalizer();
  CHECK(label_probability(probs({{"correct", 0.6}, {"incorrect", 0.2}}), def, vocab) == doctest::Approx(0.75));
  CHECK(label_probability(probs({{"correct", 0.3}, {"incorrect", 0.3}}), def, vocab) == doctest::Approx(0.5));
  const Verbalizer multi({"correct", "yes"}, {"incorrect"});
  CHECK(label_probability(probs({{"correct", 0.4}, {"yes", 0.2}, {"incorrect", 0.1}}), multi, vocab) ==
        doctest::Approx(0.75));
  CHECK_THROWS_AS(label_probability(probs({}), Verbalizer({"absent"}, {"no"}), vocab), ConfigError);
}

TEST_CASE("label_probability ignores mass outside the verbalizer") {
  const auto vocab = stub_vocab();
  const Verbalizer v({"correct", "right"}, {"incorrect", "wrong"});
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Vector p(static_cast<Eigen::Index>(vocab.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform() + 1e-3;
    p /= p.sum();
    const double base = label_probability(p, v, vocab);
    CHECK(base == doctest::Approx(oracle(p, v, vocab)).epsilon(1e-12));
    // Shuffle the non-verbalizer entries.
    std::vector<Eigen::Index> others;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const auto& tok = vocab.token(static_cast<int>(i));
      if (tok != "correct" && tok != "right" && tok != "incorrect" && tok != "wrong") others.push_back(i);
    }
    Vector q = p;
    for (std::size_t k = 0; k < others.size(); ++k) q[others[k]] = p[others[(k + 7) % others.size()]];
    CHECK(label_probability(q, v, vocab) == base);
  }
}

TEST_CASE("single template prediction follows the stub distribution") {
  const StubBackend backend(stub_vocab(), 1);
  const auto templates = default_templates();
  const auto def = Verbalizer::default_verbalizer();
  for (const auto& t : templates) {
    const auto pred = single_template_predict(kIssue, kCommit, t, backend, def);
    const auto input = backend.encode(kIssue, kCommit, t, 512);
    const Vector& table = backend.table_for(backend.embed(input));
    CHECK(pred.probability == doctest::Approx(oracle(table, def, backend.vocabulary())).epsilon(1e-12));
    CHECK(pred.architecture == ArchitectureKind::single);
    CHECK(pred.per_template_probabilities == std::vector<double>{pred.probability});
    CHECK(single_template_predict(kIssue, kCommit, t, backend, def).probability == pred.probability);
  }
}

TEST_CASE("multi template prediction is the arithmetic mean") {
  const auto def = Verbalizer::default_verbalizer();
  const auto vocab = stub_vocab();
  std::vector<PromptTemplate> pool = default_templates();
  pool.emplace_back("t4", "Linked ? [MASK]");
  pool.emplace_back("t5", "[MASK] is the verdict");
  pool.emplace_back("t6", "fix or not [MASK] x");
  pool.emplace_back("t7", "logger [MASK]");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const StubBackend backend(vocab, seed);
    for (std::size_t n : {1u, 2u, 3u, 7u}) {
      const std::span<const PromptTemplate> chosen(pool.data(), n);
      const auto multi = multi_template_predict(kIssue, kCommit, chosen, backend, def);
      double sum = 0.0;
      for (const auto& t : chosen) sum += single_template_predict(kIssue, kCommit, t, backend, def).probability;
      CHECK(std::abs(multi.probability - sum / static_cast<double>(n)) <= 1e-12);
      CHECK(multi.per_template_probabilities.size() == n);
      CHECK(multi.architecture == ArchitectureKind::multi);
      if (n == 1) {
        CHECK(multi.probability == single_template_predict(kIssue, kCommit, pool[0], backend, def).probability);
      }
    }
  }
  const StubBackend backend(vocab, 0);
  CHECK_THROWS_AS(multi_template_predict(kIssue, kCommit, {}, backend, def), ConfigError);
}

TEST_CASE("multi template arithmetic with known singles") {
  LinkPrediction p{0.0, {0.9, 0.6, 0.6}, ArchitectureKind::multi};
  p.probability = std::accumulate(p.per_template_probabilities.begin(), p.per_template_probabilities.end(), 0.0) / 3;
  CHECK(p.probability == doctest::Approx(0.7));
  // Identical singles classify as the single would.
  for (double v : {0.2, 0.5, 0.8}) {
    const LinkPrediction single{v, {v}, ArchitectureKind::single};
    const LinkPrediction multi{(v + v + v) / 3, {v, v, v}, ArchitectureKind::multi};
    CHECK(classify(multi) == classify(single));
  }
}

TEST_CASE("zero class head predicts one half") {
  const StubBackend backend(stub_vocab(), 2);
  const auto pred = cls_predict(kIssue, kCommit, default_templates()[0], backend);
  CHECK(pred.probability == 0.5);
  CHECK(pred.architecture == ArchitectureKind::cls);
  const Vector probs = softmax(backend.cls_logits(backend.embed(backend.encode(kIssue, kCommit, default_templates()[0], 64))));
  CHECK(std::abs(probs.sum() - 1.0) <= 1e-9);
}

TEST_CASE("classify thresholds with ties going positive") {
  CHECK(classify({0.75, {}, ArchitectureKind::single}) == 1);
  CHECK(classify({0.5, {}, ArchitectureKind::single}) == 1);
  CHECK(classify({0.49, {}, ArchitectureKind::single}) == 0);
  CHECK(classify({0.3, {}, ArchitectureKind::single}, 0.25) == 1);
  CHECK_THROWS_AS(classify({0.3, {}, ArchitectureKind::single}, 0.0), ConfigError);
  CHECK_THROWS_AS(classify({0.3, {}, ArchitectureKind::single}, 1.0), ConfigError);
}

TEST_CASE("architecture names") {
  CHECK(Architecture::parse("multi").kind == ArchitectureKind::multi);
  CHECK(Architecture::parse("cls").kind == ArchitectureKind::cls);
  CHECK(Architecture::parse("single2") == Architecture{ArchitectureKind::single, 1});
  CHECK(Architecture::parse("single2").name() == "single2");
  CHECK_THROWS_AS(Architecture::parse("single0"), ConfigError);
  CHECK_THROWS_AS(Architecture::parse("single"), ConfigError);
  CHECK_THROWS_AS(Architecture::parse("dual"), ConfigError);
}
