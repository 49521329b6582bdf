#ifndef SPIKEQ_SNN_ADAM_HPP
#define SPIKEQ_SNN_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "spikeq/common.hpp"

namespace spikeq::snn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment estimates, one pair per parameter matrix.
template <typename Scalar>
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<MatrixX<Scalar>> m;
  std::vector<MatrixX<Scalar>> v;

  bool initialized() const { return !m.empty(); }
};

/// Bias-corrected Adam step applied in place. Moments are created lazily on
/// the first call.
template <typename Scalar>
void adam_update(const std::vector<MatrixX<Scalar>*>& params, const std::vector<const MatrixX<Scalar>*>& grads,
                 AdamState<Scalar>& state, double lr) {
  if (params.size() != grads.size()) throw ShapeError("adam: parameter/gradient count mismatch");
  if (!state.initialized()) {
    for (const auto* p : params) {
      state.m.push_back(MatrixX<Scalar>::Zero(p->rows(), p->cols()));
      state.v.push_back(MatrixX<Scalar>::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam: state does not match parameters");
  ++state.step;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const Scalar step_size = static_cast<Scalar>(lr / bc1);
  const Scalar inv_bc2 = static_cast<Scalar>(1.0 / bc2);
  const Scalar b1 = static_cast<Scalar>(c.beta1), b2 = static_cast<Scalar>(c.beta2);
  const Scalar eps = static_cast<Scalar>(c.eps);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    const auto& g = *grads[k];
    if (p.rows() != g.rows() || p.cols() != g.cols() || state.m[k].rows() != p.rows() ||
        state.m[k].cols() != p.cols()) {
      throw ShapeError("adam: shape mismatch for parameter " + std::to_string(k));
    }
    state.m[k] = b1 * state.m[k] + (Scalar(1) - b1) * g;
    state.v[k] = b2 * state.v[k] + (Scalar(1) - b2) * g.cwiseAbs2();
    p.array() -= step_size * state.m[k].array() / ((state.v[k].array() * inv_bc2).sqrt() + eps);
  }
}

}  // namespace spikeq::snn

#endif  // SPIKEQ_SNN_ADAM_HPP
