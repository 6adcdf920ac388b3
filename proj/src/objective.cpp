#include "linkcloze/objective.hpp"

#include <algorithm>
#include <cmath>

namespace linkcloze {

double clamp_probability(double p) noexcept { return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor); }

double bce_loss(double p, int label) noexcept {
  const double q = clamp_probability(p);
  return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double bce_derivative(double p, int label) noexcept {
  if (p < kProbabilityFloor || p > 1.0 - kProbabilityFloor) return 0.0;
  return label == 1 ? -1.0 / p : 1.0 / (1.0 - p);
}

namespace {

struct Scores {
  double positive;
  double negative;
  double denominator;
  bool floored;
};

Scores verbalizer_scores(const Eigen::Ref<const Vector>& probs, const VerbalizerIds& ids) {
  double pos = 0.0;
  for (int id : ids.positive) pos += probs[id];
  double neg = 0.0;
  for (int id : ids.negative) neg += probs[id];
  pos /= static_cast<double>(ids.positive.size());
  neg /= static_cast<double>(ids.negative.size());
  const double sum = pos + neg;
  return {pos, neg, std::max(sum, kScoreFloor), sum < kScoreFloor};
}

}  // namespace

double label_probability(const Eigen::Ref<const Vector>& vocab_probs, const VerbalizerIds& ids) {
  const auto s = verbalizer_scores(vocab_probs, ids);
  return s.positive / s.denominator;
}

HeadGradient mlm_head_gradient(const Eigen::Ref<const Vector>& logits, const VerbalizerIds& ids, int label) {
  const Vector probs = softmax(logits);
  const auto s = verbalizer_scores(probs, ids);
  HeadGradient out;
  out.probability = s.positive / s.denominator;
  out.loss = bce_loss(out.probability, label);

  const double dl_dp = bce_derivative(out.probability, label);
  double dp_dpos = 1.0 / s.denominator;
  double dp_dneg = 0.0;
  if (!s.floored) {
    const double d2 = s.denominator * s.denominator;
    dp_dpos = s.negative / d2;
    dp_dneg = -s.positive / d2;
  }
  // Gradient w.r.t. the vocabulary probabilities, sparse on label words.
  Vector g = Vector::Zero(probs.size());
  for (int id : ids.positive) g[id] += dl_dp * dp_dpos / static_cast<double>(ids.positive.size());
  for (int id : ids.negative) g[id] += dl_dp * dp_dneg / static_cast<double>(ids.negative.size());
  const double inner = g.dot(probs);
  out.logit_gradient = probs.cwiseProduct(g.array().matrix() - Vector::Constant(probs.size(), inner));
  return out;
}

HeadGradient cls_head_gradient(const Eigen::Ref<const Vector>& logits, int label) {
  const Vector q = softmax(logits);
  HeadGradient out;
  out.probability = q[1];
  out.loss = bce_loss(q[1], label);
  const double dl_dp = bce_derivative(q[1], label);
  out.logit_gradient = Vector(2);
  out.logit_gradient[0] = -dl_dp * q[1] * q[0];
  out.logit_gradient[1] = dl_dp * q[1] * (1.0 - q[1]);
  return out;
}

HeadGradient token_head_gradient(const Eigen::Ref<const Vector>& logits, int token) {
  const Vector q = softmax(logits);
  const auto t = static_cast<Eigen::Index>(token);
  HeadGradient out;
  out.probability = q[t];
  out.loss = -std::log(clamp_probability(q[t]));
  if (q[t] < kProbabilityFloor || q[t] > 1.0 - kProbabilityFloor) {
    out.logit_gradient = Vector::Zero(q.size());
  } else {
    out.logit_gradient = q;
    out.logit_gradient[t] -= 1.0;
  }
  return out;
}

}  // namespace linkcloze
