#ifndef SPIKEQ_SNN_LOSS_HPP
#define SPIKEQ_SNN_LOSS_HPP

#include <cmath>
#include <span>

#include "spikeq/common.hpp"

namespace spikeq::snn {

template <typename Scalar>
struct LossResult {
  double loss = 0.0;        // mean over the batch
  MatrixX<Scalar> grad;     // d loss / d scores, same shape as the scores
};

/// Mean softmax cross-entropy over the columns of scores (classes x batch).
template <typename Scalar>
LossResult<Scalar> softmax_cross_entropy(const MatrixX<Scalar>& scores, std::span<const int> targets) {
  const Eigen::Index classes = scores.rows();
  const Eigen::Index batch = scores.cols();
  if (static_cast<Eigen::Index>(targets.size()) != batch) throw ShapeError("one target per column required");
  LossResult<Scalar> r;
  r.grad.resize(classes, batch);
  double total = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int t = targets[static_cast<std::size_t>(b)];
    if (t < 0 || t >= classes) throw ShapeError("target index out of range");
    const Scalar mx = scores.col(b).maxCoeff();
    const auto shifted = (scores.col(b).array() - mx).eval();
    const Scalar z = shifted.exp().sum();
    total += static_cast<double>(std::log(z) - shifted(t));
    r.grad.col(b) = (shifted.exp() / z).matrix();
    r.grad(t, b) -= Scalar(1);
  }
  r.loss = total / static_cast<double>(batch);
  r.grad /= static_cast<Scalar>(batch);
  return r;
}

/// -log softmax(v)[target] for a single vector.
template <typename Derived>
double loss_softmax_ce(const Eigen::MatrixBase<Derived>& v, int target) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> m = v;
  const int t[1] = {target};
  return softmax_cross_entropy<Scalar>(m, t).loss;
}

}  // namespace spikeq::snn

#endif  // SPIKEQ_SNN_LOSS_HPP
