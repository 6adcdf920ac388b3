#include "linkcloze/adversarial.hpp"

#include "linkcloze/errors.hpp"

namespace linkcloze {

Matrix init_delta(Eigen::Index rows, Eigen::Index cols, double epsilon, Rng& rng) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  Matrix delta(rows, cols);
  for (Eigen::Index i = 0; i < delta.size(); ++i) delta.data()[i] = rng.uniform(-epsilon, epsilon);
  return delta;
}

Matrix pgd_step(const Matrix& delta, const Matrix& grad, double alpha, double epsilon) {
  if (delta.rows() != grad.rows() || delta.cols() != grad.cols()) {
    throw ShapeError("pgd_step: delta and gradient shapes differ");
  }
  return (delta.array() + alpha * grad.array().sign()).cwiseMax(-epsilon).cwiseMin(epsilon).matrix();
}

Matrix perturb(const Matrix& embeddings, const Matrix& delta) {
  if (embeddings.rows() != delta.rows() || embeddings.cols() != delta.cols()) {
    throw ShapeError("perturb: embedding and perturbation shapes differ");
  }
  return embeddings + delta;
}

Matrix adversarial_example(const Matrix& embeddings, const EmbeddingGradient& gradient,
                           const PerturbationConfig& config, Rng& rng, const std::vector<bool>& frozen_rows) {
  config.validate();
  if (!frozen_rows.empty() && frozen_rows.size() != static_cast<std::size_t>(embeddings.rows())) {
    throw ShapeError("frozen_rows length differs from the sequence length");
  }
  auto freeze = [&frozen_rows](Matrix& delta) {
    for (std::size_t r = 0; r < frozen_rows.size(); ++r) {
      if (frozen_rows[r]) delta.row(static_cast<Eigen::Index>(r)).setZero();
    }
  };
  Matrix delta = init_delta(embeddings.rows(), embeddings.cols(), config.epsilon, rng);
  freeze(delta);
  for (int t = 0; t < config.steps; ++t) {
    delta = pgd_step(delta, gradient(perturb(embeddings, delta)), config.alpha, config.epsilon);
    freeze(delta);
  }
  return perturb(embeddings, delta);
}

}  // namespace linkcloze
