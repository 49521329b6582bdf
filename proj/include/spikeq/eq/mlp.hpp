#ifndef SPIKEQ_EQ_MLP_HPP
#define SPIKEQ_EQ_MLP_HPP

#include <cmath>
#include <vector>

#include "spikeq/common.hpp"
#include "spikeq/rng.hpp"

namespace spikeq::eq {

/// Input -> ReLU hidden layer -> linear scores. Columns are samples.
template <typename Scalar>
struct Mlp {
  MatrixX<Scalar> w1;  // hidden x in
  MatrixX<Scalar> b1;  // hidden x 1
  MatrixX<Scalar> w2;  // out x hidden
  MatrixX<Scalar> b2;  // out x 1

  Eigen::Index input_width() const { return w1.cols(); }
  Eigen::Index hidden_width() const { return w1.rows(); }
  Eigen::Index output_width() const { return w2.rows(); }

  static Mlp init(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out, Rng& rng) {
    Mlp m;
    m.w1 = uniform_matrix(n_hidden, n_in, rng);
    m.b1 = uniform_matrix(n_hidden, 1, rng, static_cast<double>(n_in));
    m.w2 = uniform_matrix(n_out, n_hidden, rng);
    m.b2 = uniform_matrix(n_out, 1, rng, static_cast<double>(n_hidden));
    return m;
  }

  std::vector<MatrixX<Scalar>*> parameters() { return {&w1, &b1, &w2, &b2}; }

  void validate() const {
    if (w1.size() == 0 || w2.size() == 0) throw ShapeError("mlp has empty weights");
    if (b1.rows() != w1.rows() || b1.cols() != 1 || w2.cols() != w1.rows() || b2.rows() != w2.rows() ||
        b2.cols() != 1) {
      throw ShapeError("mlp layer shapes are inconsistent");
    }
  }

 private:
  static MatrixX<Scalar> uniform_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double fan_in = 0.0) {
    const double bound = 1.0 / std::sqrt(fan_in > 0.0 ? fan_in : static_cast<double>(c));
    MatrixX<Scalar> m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = static_cast<Scalar>(uniform(rng, -bound, bound));
    return m;
  }
};

template <typename Scalar>
struct MlpCache {
  MatrixX<Scalar> input;
  MatrixX<Scalar> hidden;  // post-ReLU
};

template <typename Scalar>
MatrixX<Scalar> mlp_forward(const Mlp<Scalar>& m, const MatrixX<Scalar>& x, MlpCache<Scalar>* cache = nullptr) {
  if (x.rows() != m.input_width()) {
    throw ShapeError("mlp input width " + std::to_string(x.rows()) + " != " + std::to_string(m.input_width()));
  }
  MatrixX<Scalar> h = ((m.w1 * x).colwise() + m.b1.col(0)).cwiseMax(Scalar(0));
  MatrixX<Scalar> z = (m.w2 * h).colwise() + m.b2.col(0);
  if (cache) {
    cache->input = x;
    cache->hidden = std::move(h);
  }
  return z;
}

template <typename Scalar>
struct MlpGradients {
  MatrixX<Scalar> w1, b1, w2, b2;
};

template <typename Scalar>
MlpGradients<Scalar> mlp_backward(const Mlp<Scalar>& m, const MlpCache<Scalar>& cache,
                                  const MatrixX<Scalar>& grad_out) {
  MlpGradients<Scalar> g;
  g.w2.noalias() = grad_out * cache.hidden.transpose();
  g.b2 = grad_out.rowwise().sum();
  MatrixX<Scalar> dh = m.w2.transpose() * grad_out;
  dh = (cache.hidden.array() > Scalar(0)).select(dh, Scalar(0));
  g.w1.noalias() = dh * cache.input.transpose();
  g.b1 = dh.rowwise().sum();
  return g;
}

}  // namespace spikeq::eq

#endif  // SPIKEQ_EQ_MLP_HPP
