#pragma once

#include <Eigen/Dense>

namespace linkcloze {

// Rows are sequence positions, so row-major keeps a token's vector contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Numerically stable softmax of one logit vector.
inline Vector softmax(const Eigen::Ref<const Vector>& logits) {
  Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace linkcloze
