#pragma once

#include "linkcloze/prompting.hpp"
#include "linkcloze/tensor.hpp"

namespace linkcloze {

// Probabilities entering a log are kept inside [kProbabilityFloor, 1 - kProbabilityFloor].
inline constexpr double kProbabilityFloor = 1e-7;
inline constexpr double kScoreFloor = 1e-12;

double clamp_probability(double p) noexcept;

// -[y log p + (1 - y) log(1 - p)] on the clamped probability.
double bce_loss(double p, int label) noexcept;

// d bce / dp; zero where the clamp is active.
double bce_derivative(double p, int label) noexcept;

// mean(P[positive]) / (mean(P[positive]) + mean(P[negative])), denominator
// floored at kScoreFloor.
double label_probability(const Eigen::Ref<const Vector>& vocab_probs, const VerbalizerIds& ids);

struct HeadGradient {
  double loss = 0.0;
  double probability = 0.0;
  Vector logit_gradient;
};

// Loss and d loss / d logits for the verbalized MLM objective at one position.
HeadGradient mlm_head_gradient(const Eigen::Ref<const Vector>& logits, const VerbalizerIds& ids, int label);

// Same for a two-class head whose positive class is index 1.
HeadGradient cls_head_gradient(const Eigen::Ref<const Vector>& logits, int label);

// -log softmax(logits)[token] (clamped), for plain masked-token prediction.
HeadGradient token_head_gradient(const Eigen::Ref<const Vector>& logits, int token);

}  // namespace linkcloze
