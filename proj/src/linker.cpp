#include "linkcloze/linker.hpp"

#include <numeric>

#include "linkcloze/errors.hpp"
#include "linkcloze/objective.hpp"

namespace linkcloze {

double label_probability(const Eigen::Ref<const Vector>& vocab_probs, const Verbalizer& verbalizer,
                         const Vocabulary& vocab) {
  if (static_cast<std::size_t>(vocab_probs.size()) != vocab.size()) {
    throw ShapeError("probability vector size does not match the vocabulary");
  }
  return label_probability(vocab_probs, resolve(verbalizer, vocab));
}

double cloze_probability(const MaskedLanguageModel& backend, const PromptedInput& input, const VerbalizerIds& ids) {
  const Vector logits = backend.mask_logits(backend.embed(input), input.mask_position);
  return label_probability(softmax(logits), ids);
}

double cls_probability(const MaskedLanguageModel& backend, const PromptedInput& input) {
  return softmax(backend.cls_logits(backend.embed(input)))[1];
}

LinkPrediction single_template_predict(const IssueArtifact& issue, const CommitArtifact& commit,
                                       const PromptTemplate& prompt, const MaskedLanguageModel& backend,
                                       const Verbalizer& verbalizer, std::size_t max_len) {
  const auto ids = resolve(verbalizer, backend.vocabulary());
  const double p = cloze_probability(backend, backend.encode(issue, commit, prompt, max_len), ids);
  return {p, {p}, ArchitectureKind::single};
}

LinkPrediction multi_template_predict(const IssueArtifact& issue, const CommitArtifact& commit,
                                      std::span<const PromptTemplate> templates, const MaskedLanguageModel& backend,
                                      const Verbalizer& verbalizer, std::size_t max_len) {
  if (templates.empty()) throw ConfigError("multi-template prediction needs at least one template");
  const auto ids = resolve(verbalizer, backend.vocabulary());
  LinkPrediction out;
  out.architecture = ArchitectureKind::multi;
  for (const auto& t : templates) {
    out.per_template_probabilities.push_back(cloze_probability(backend, backend.encode(issue, commit, t, max_len), ids));
  }
  out.probability = std::accumulate(out.per_template_probabilities.begin(), out.per_template_probabilities.end(), 0.0) /
                    static_cast<double>(out.per_template_probabilities.size());
  return out;
}

LinkPrediction cls_predict(const IssueArtifact& issue, const CommitArtifact& commit, const PromptTemplate& prompt,
                           const MaskedLanguageModel& backend, std::size_t max_len) {
  return {cls_probability(backend, backend.encode(issue, commit, prompt, max_len)), {}, ArchitectureKind::cls};
}

int classify(const LinkPrediction& prediction, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  return prediction.probability >= threshold ? 1 : 0;
}

Architecture Architecture::parse(std::string_view name) {
  if (name == "multi") return {ArchitectureKind::multi, 0};
  if (name == "cls") return {ArchitectureKind::cls, 0};
  if (name.rfind("single", 0) == 0 && name.size() > 6) {
    std::size_t index = 0;
    for (char c : name.substr(6)) {
      if (c < '0' || c > '9') throw ConfigError("unknown architecture '" + std::string(name) + "'");
      index = index * 10 + static_cast<std::size_t>(c - '0');
    }
    if (index == 0) throw ConfigError("template numbering starts at single1");
    return {ArchitectureKind::single, index - 1};
  }
  throw ConfigError("unknown architecture '" + std::string(name) + "'");
}

std::string Architecture::name() const {
  if (kind == ArchitectureKind::single) return "single" + std::to_string(template_index + 1);
  return std::string(to_string(kind));
}

std::string_view to_string(ArchitectureKind kind) noexcept {
  switch (kind) {
    case ArchitectureKind::single:
      return "single";
    case ArchitectureKind::multi:
      return "multi";
    case ArchitectureKind::cls:
      return "cls";
  }
  return "unknown";
}

}  // namespace linkcloze
