#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "linkcloze/errors.hpp"
#include "linkcloze/kvconfig.hpp"
#include "linkcloze/random.hpp"
#include "linkcloze/tensor.hpp"

namespace linkcloze {

// L-infinity PGD settings. Defaults: radius 1, step 1, a single step.
struct PerturbationConfig {
  double epsilon = 1.0;
  double alpha = 1.0;
  int steps = 1;
  std::uint64_t seed = 0;

  // Throws ConfigError unless epsilon > 0, alpha > 0 and steps >= 1.
  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("adv.epsilon must be positive");
    if (!(alpha > 0.0)) throw ConfigError("adv.alpha must be positive");
    if (steps < 1) throw ConfigError("adv.steps must be at least 1");
  }

  friend bool operator==(const PerturbationConfig&, const PerturbationConfig&) = default;
};

// Reads adv.epsilon / adv.alpha / adv.steps / adv.seed over `defaults`.
inline PerturbationConfig perturbation_from(const KeyValueConfig& config, PerturbationConfig defaults = {}) {
  if (auto v = config.get_double("adv.epsilon")) defaults.epsilon = *v;
  if (auto v = config.get_double("adv.alpha")) defaults.alpha = *v;
  if (auto v = config.get_int("adv.steps")) defaults.steps = static_cast<int>(*v);
  if (auto v = config.get_int("adv.seed")) defaults.seed = static_cast<std::uint64_t>(*v);
  defaults.validate();
  return defaults;
}

// Entries i.i.d. U(-epsilon, epsilon).
Matrix init_delta(Eigen::Index rows, Eigen::Index cols, double epsilon, Rng& rng);

// clip(delta + alpha * sign(grad), -epsilon, epsilon) with sign(0) = 0.
Matrix pgd_step(const Matrix& delta, const Matrix& grad, double alpha, double epsilon);

Matrix perturb(const Matrix& embeddings, const Matrix& delta);

// Gradient of the training loss w.r.t. its (perturbed) embedding input.
using EmbeddingGradient = std::function<Matrix(const Matrix&)>;

// delta <- init; repeat steps: g = grad(E + delta), delta <- pgd_step;
// returns E + delta. Rows flagged in `frozen_rows` (padding) stay unperturbed.
Matrix adversarial_example(const Matrix& embeddings, const EmbeddingGradient& gradient,
                           const PerturbationConfig& config, Rng& rng, const std::vector<bool>& frozen_rows = {});

}  // namespace linkcloze
