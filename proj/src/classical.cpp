#include "spikeq/eq/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

namespace spikeq::eq {

namespace {

constexpr double kMinNoise = 1e-9;

void require_taps(int n) {
  if (n < 1) throw ConfigError("equalizer needs at least one tap");
}

/// Total error of taps w for target delay d with some rows of C ignored.
double mse_of(const Eigen::MatrixXcd& conv, const Eigen::VectorXcd& w, int d, double sigma2) {
  Eigen::VectorXcd c = conv * w;
  c(d) -= 1.0;
  return c.squaredNorm() + sigma2 * w.squaredNorm();
}

}  // namespace

Eigen::MatrixXcd convolution_matrix(const FirChannel& h, int n_taps) {
  require_taps(n_taps);
  const int L = h.length();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_taps + L - 1, n_taps);
  for (int j = 0; j < n_taps; ++j)
    for (int l = 0; l < L; ++l) m(j + l, j) = h.taps()[static_cast<std::size_t>(l)];
  return m;
}

Eigen::VectorXcd combined_response(const FirChannel& h, const Eigen::VectorXcd& taps) {
  return convolution_matrix(h, static_cast<int>(taps.size())) * taps;
}

LinearEqualizer zf_equalizer(const FirChannel& h, int n_taps) {
  const Eigen::MatrixXcd conv = convolution_matrix(h, n_taps);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(conv);
  if (qr.rank() < n_taps) throw SingularSystemError("channel convolution matrix is rank deficient");
  LinearEqualizer best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int d = 0; d < conv.rows(); ++d) {
    const Eigen::VectorXcd w = qr.solve(Eigen::VectorXcd::Unit(conv.rows(), d));
    const double r = mse_of(conv, w, d, 0.0);
    if (r < best.cost) best = {w, d, r};
  }
  return best;
}

LinearEqualizer lmmse_equalizer(const FirChannel& h, int n_taps, double sigma2) {
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be non-negative");
  const Eigen::MatrixXcd conv = convolution_matrix(h, n_taps);
  Eigen::MatrixXcd gram = conv.adjoint() * conv;
  gram.diagonal().array() += sigma2;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw SingularSystemError("LMMSE normal equations are singular");
  const Eigen::MatrixXcd solved = ldlt.solve(conv.adjoint());
  LinearEqualizer best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int d = 0; d < conv.rows(); ++d) {
    const Eigen::VectorXcd w = solved.col(d);
    const double e = mse_of(conv, w, d, sigma2);
    if (e < best.cost) best = {w, d, e};
  }
  return best;
}

DfeFilter classical_dfe(const FirChannel& h, int n_ff, int m_fb, double sigma2) {
  if (m_fb < 0) throw ConfigError("feedback length must be non-negative");
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be non-negative");
  const Eigen::MatrixXcd conv = convolution_matrix(h, n_ff);
  const int rows = static_cast<int>(conv.rows());
  DfeFilter best;
  best.mse = std::numeric_limits<double>::infinity();
  for (int d = 0; d < rows; ++d) {
    // Postcursors d+1..d+m are cancelled by feedback, so they drop out of the cost.
    Eigen::MatrixXcd masked = conv;
    const int last = std::min(rows - 1, d + m_fb);
    for (int r = d + 1; r <= last; ++r) masked.row(r).setZero();
    Eigen::MatrixXcd gram = masked.adjoint() * masked;
    gram.diagonal().array() += sigma2;
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) continue;
    const Eigen::VectorXcd w = ldlt.solve(masked.adjoint().col(d));
    if (!w.allFinite()) continue;
    const double e = mse_of(masked, w, d, sigma2);
    if (e < best.mse) {
      const Eigen::VectorXcd c = conv * w;
      best.ff = w;
      best.fb = Eigen::VectorXcd::Zero(m_fb);
      for (int i = 1; i <= m_fb && d + i < rows; ++i) best.fb(i - 1) = c(d + i);
      best.delay = d;
      best.mse = e;
    }
  }
  if (!std::isfinite(best.mse)) throw SingularSystemError("DFE normal equations are singular for every delay");
  return best;
}

EqualizerOutput equalize_linear(std::span<const Complex> y, const LinearEqualizer& eq, const Constellation& c) {
  const auto K = static_cast<Eigen::Index>(y.size());
  const Eigen::Index n = eq.taps.size();
  IndexVector idx(y.size(), 0);
  for (Eigen::Index k = 0; k < K; ++k) {
    Complex z = 0.0;
    for (Eigen::Index j = 0; j < n && j <= k; ++j) z += eq.taps(j) * y[static_cast<std::size_t>(k - j)];
    if (k >= eq.delay) idx[static_cast<std::size_t>(k)] = c.slice(z);
  }
  return make_output(std::move(idx), c, eq.delay);
}

EqualizerOutput equalize_dfe(std::span<const Complex> y, const DfeFilter& f, const Constellation& c,
                             std::span<const int> genie) {
  const auto K = static_cast<Eigen::Index>(y.size());
  const Eigen::Index n = f.ff.size();
  const Eigen::Index m = f.fb.size();
  const bool use_genie = !genie.empty();
  if (use_genie && static_cast<Eigen::Index>(genie.size()) + f.delay < K) {
    throw ShapeError("genie sequence shorter than the received sequence");
  }
  IndexVector idx(y.size(), 0);
  for (Eigen::Index k = f.delay; k < K; ++k) {
    Complex z = 0.0;
    for (Eigen::Index j = 0; j < n && j <= k; ++j) z += f.ff(j) * y[static_cast<std::size_t>(k - j)];
    for (Eigen::Index i = 1; i <= m; ++i) {
      const Eigen::Index t = k - f.delay - i;  // transmit time of the fed-back symbol
      if (t < 0) break;
      const int past = use_genie ? genie[static_cast<std::size_t>(t)] : idx[static_cast<std::size_t>(t + f.delay)];
      z -= f.fb(i - 1) * c.point(past);
    }
    idx[static_cast<std::size_t>(k)] = c.slice(z);
  }
  return make_output(std::move(idx), c, f.delay);
}

std::size_t trellis_states(const FirChannel& h, const Constellation& c) {
  std::size_t s = 1;
  const auto q = static_cast<std::size_t>(c.size());
  for (int l = 1; l < h.length(); ++l) {
    if (s > std::numeric_limits<std::size_t>::max() / q) return std::numeric_limits<std::size_t>::max();
    s *= q;
  }
  return s;
}

EqualizerOutput map_detector(std::span<const Complex> y, const FirChannel& h, const Constellation& c,
                             double sigma2, std::size_t state_budget) {
  const std::size_t S = trellis_states(h, c);
  if (S > state_budget) {
    throw InfeasibleError("MAP infeasible: " + c.name() + " on " + h.name() + " needs " +
                          (S == std::numeric_limits<std::size_t>::max() ? std::string("too many")
                                                                         : std::to_string(S)) +
                          " trellis states, budget is " + std::to_string(state_budget));
  }
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be non-negative");
  const double noise = std::max(sigma2, kMinNoise);
  const int Q = c.size();
  const int L = h.length();
  const std::size_t K = y.size();
  const auto& taps = h.taps();

  // State s holds x[k-1] .. x[k-L+1] as base-Q digits, x[k-1] most significant.
  std::vector<std::size_t> place(static_cast<std::size_t>(std::max(L - 1, 0)));
  for (int l = L - 1, p = 1; l >= 1; --l, p *= Q) place[static_cast<std::size_t>(l - 1)] = static_cast<std::size_t>(p);
  const std::size_t top = L > 1 ? place[0] : 0;
  auto digit = [&](std::size_t s, int l) { return static_cast<int>((s / place[static_cast<std::size_t>(l - 1)]) % Q); };
  auto next_state = [&](std::size_t s, int a) { return L > 1 ? static_cast<std::size_t>(a) * top + s / Q : 0; };

  // Noiseless output for (state, symbol) once every tap reaches a real symbol.
  std::vector<Complex> mean(S * static_cast<std::size_t>(Q));
  auto mean_at = [&](std::size_t s, int a, std::size_t k) {
    Complex mu = taps[0] * c.point(a);
    for (int l = 1; l < L && static_cast<std::size_t>(l) <= k; ++l) mu += taps[static_cast<std::size_t>(l)] * c.point(digit(s, l));
    return mu;
  };
  for (std::size_t s = 0; s < S; ++s)
    for (int a = 0; a < Q; ++a) mean[s * Q + a] = mean_at(s, a, static_cast<std::size_t>(L));

  std::vector<double> metric(S * static_cast<std::size_t>(Q));
  auto branch_metrics = [&](std::size_t k) {
    double dmin = std::numeric_limits<double>::infinity();
    const bool warm = k + 1 >= static_cast<std::size_t>(L);
    for (std::size_t s = 0; s < S; ++s)
      for (int a = 0; a < Q; ++a) {
        const Complex mu = warm ? mean[s * Q + a] : mean_at(s, a, k);
        const double d = std::norm(y[k] - mu);
        metric[s * Q + a] = d;
        dmin = std::min(dmin, d);
      }
    for (double& m : metric) m = std::exp(-(m - dmin) / noise);
  };
  auto normalize = [](std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    if (!(sum > 0.0) || !std::isfinite(sum)) {
      std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    } else {
      for (double& x : v) x /= sum;
    }
  };

  std::vector<double> alpha((K + 1) * S);
  std::fill(alpha.begin(), alpha.begin() + static_cast<std::ptrdiff_t>(S), 1.0 / static_cast<double>(S));
  std::vector<double> next(S);
  for (std::size_t k = 0; k < K; ++k) {
    branch_metrics(k);
    std::fill(next.begin(), next.end(), 0.0);
    const double* a_k = &alpha[k * S];
    for (std::size_t s = 0; s < S; ++s)
      for (int a = 0; a < Q; ++a) next[next_state(s, a)] += a_k[s] * metric[s * Q + a];
    normalize(next);
    std::copy(next.begin(), next.end(), alpha.begin() + static_cast<std::ptrdiff_t>((k + 1) * S));
  }

  IndexVector idx(K, 0);
  std::vector<double> beta(S, 1.0 / static_cast<double>(S)), prev(S), post(static_cast<std::size_t>(Q));
  for (std::size_t k = K; k-- > 0;) {
    branch_metrics(k);
    std::fill(prev.begin(), prev.end(), 0.0);
    std::fill(post.begin(), post.end(), 0.0);
    const double* a_k = &alpha[k * S];
    for (std::size_t s = 0; s < S; ++s)
      for (int a = 0; a < Q; ++a) {
        const double g = metric[s * Q + a] * beta[next_state(s, a)];
        prev[s] += g;
        post[static_cast<std::size_t>(a)] += a_k[s] * g;
      }
    idx[k] = static_cast<int>(std::max_element(post.begin(), post.end()) - post.begin());
    normalize(prev);
    std::swap(beta, prev);
  }
  return make_output(std::move(idx), c, 0);
}

}  // namespace spikeq::eq
