#ifndef SPIKEQ_EQ_CLASSICAL_HPP
#define SPIKEQ_EQ_CLASSICAL_HPP

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "spikeq/eq/architecture.hpp"
#include "spikeq/link.hpp"

namespace spikeq::eq {

inline constexpr std::size_t kMapStateBudget = 4096;

/// (n_taps + L - 1) x n_taps Toeplitz matrix C with C w = h * w.
Eigen::MatrixXcd convolution_matrix(const FirChannel& h, int n_taps);

/// Transversal filter z[k] = sum_j taps[j] y[k - j], estimating x[k - delay].
struct LinearEqualizer {
  Eigen::VectorXcd taps;
  int delay = 0;
  /// Residual ISI energy (ZF) or mean squared error (LMMSE) at the chosen delay.
  double cost = 0.0;
};

/// Least-squares zero forcing: minimizes |C w - e_d| over w, then over d.
LinearEqualizer zf_equalizer(const FirChannel& h, int n_taps = 31);

/// Minimizes E|x[k-d] - z[k]|^2 for unit-energy symbols and total noise
/// variance sigma2, then picks the delay with the lowest error.
LinearEqualizer lmmse_equalizer(const FirChannel& h, int n_taps, double sigma2);

/// Combined channel-equalizer response C w.
Eigen::VectorXcd combined_response(const FirChannel& h, const Eigen::VectorXcd& taps);

/// MMSE decision-feedback filter pair. The feedback filter subtracts
/// sum_i fb[i-1] x_hat[k - delay - i] for i = 1..m.
struct DfeFilter {
  Eigen::VectorXcd ff;
  Eigen::VectorXcd fb;
  int delay = 0;
  double mse = 0.0;
};

/// Feedforward taps from the Wiener equations assuming correct past
/// decisions; the feedback taps cancel the postcursors they leave.
DfeFilter classical_dfe(const FirChannel& h, int n_ff, int m_fb, double sigma2);

EqualizerOutput equalize_linear(std::span<const Complex> y, const LinearEqualizer& eq, const Constellation& c);

/// Runs the DFE on decided symbols, or on `genie` (transmitted indices) when
/// given. Symbols before the start of the sequence are taken as zero.
EqualizerOutput equalize_dfe(std::span<const Complex> y, const DfeFilter& f, const Constellation& c,
                             std::span<const int> genie = {});

/// Number of trellis states |M|^(L-1); saturates instead of overflowing.
std::size_t trellis_states(const FirChannel& h, const Constellation& c);

/// Symbol-wise MAP detection by forward-backward recursion over the ISI
/// trellis. Throws InfeasibleError when the trellis exceeds state_budget.
EqualizerOutput map_detector(std::span<const Complex> y, const FirChannel& h, const Constellation& c,
                             double sigma2, std::size_t state_budget = kMapStateBudget);

}  // namespace spikeq::eq

#endif  // SPIKEQ_EQ_CLASSICAL_HPP
