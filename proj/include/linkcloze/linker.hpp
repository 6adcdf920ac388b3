#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linkcloze/backend.hpp"
#include "linkcloze/corpus.hpp"
#include "linkcloze/prompting.hpp"

namespace linkcloze {

enum class ArchitectureKind { single, multi, cls };

// Which predictor to run: single{1..n} names a template by position, multi
// averages every template, cls reads the class-token head (using the first
// template to build its input).
struct Architecture {
  ArchitectureKind kind = ArchitectureKind::multi;
  std::size_t template_index = 0;

  // "single1", "single2", ..., "multi", "cls"; throws ConfigError otherwise.
  static Architecture parse(std::string_view name);
  std::string name() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct LinkPrediction {
  double probability = 0.0;
  std::vector<double> per_template_probabilities;
  ArchitectureKind architecture = ArchitectureKind::single;
};

// Mean label-word probability of the positive set over the sum of both means.
// Throws ConfigError if a verbalizer word is missing from `vocab`.
double label_probability(const Eigen::Ref<const Vector>& vocab_probs, const Verbalizer& verbalizer,
                         const Vocabulary& vocab);

// Cloze prediction for one template from pre-tokenised input.
double cloze_probability(const MaskedLanguageModel& backend, const PromptedInput& input, const VerbalizerIds& ids);

// Positive-class probability of the attached two-class head.
double cls_probability(const MaskedLanguageModel& backend, const PromptedInput& input);

LinkPrediction single_template_predict(const IssueArtifact& issue, const CommitArtifact& commit,
                                       const PromptTemplate& prompt, const MaskedLanguageModel& backend,
                                       const Verbalizer& verbalizer, std::size_t max_len = kDefaultMaxLength);

// Arithmetic mean of the single-template probabilities.
// Throws ConfigError on an empty template list.
LinkPrediction multi_template_predict(const IssueArtifact& issue, const CommitArtifact& commit,
                                      std::span<const PromptTemplate> templates, const MaskedLanguageModel& backend,
                                      const Verbalizer& verbalizer, std::size_t max_len = kDefaultMaxLength);

LinkPrediction cls_predict(const IssueArtifact& issue, const CommitArtifact& commit, const PromptTemplate& prompt,
                           const MaskedLanguageModel& backend, std::size_t max_len = kDefaultMaxLength);

// 1 iff probability >= threshold. Throws ConfigError unless 0 < threshold < 1.
int classify(const LinkPrediction& prediction, double threshold = 0.5);

std::string_view to_string(ArchitectureKind kind) noexcept;

}  // namespace linkcloze
