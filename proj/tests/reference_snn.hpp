// Plain-loop reference simulator used as a test oracle. It shares no code
// with the batched engine beyond the parameter structs.
#ifndef SPIKEQ_TESTS_REFERENCE_SNN_HPP
#define SPIKEQ_TESTS_REFERENCE_SNN_HPP

#include <cmath>
#include <vector>

#include "spikeq/snn/network.hpp"

namespace spikeq::testing {

/// Output membrane potentials of a single sample after all steps, with the
/// spike gate replaced by the surrogate's soft gate when smoothed is true.
inline std::vector<double> reference_forward(const snn::Network<double>& net, const std::vector<double>& pattern,
                                             const std::vector<double>& gain, bool smoothed,
                                             const snn::SurrogateSpec& sg) {
  const auto& layers = net.layers();
  std::vector<std::vector<double>> v(layers.size()), i(layers.size()), s(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto n = static_cast<std::size_t>(layers[l].size());
    v[l].assign(n, 0.0);
    i[l].assign(n, 0.0);
    s[l].assign(n, 0.0);
  }
  for (std::size_t k = 0; k < gain.size(); ++k) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      const auto& p = L.neuron;
      const std::size_t n = v[l].size();
      const double alpha = std::exp(-p.dt / p.tau_m);
      const double beta = std::exp(-p.dt / p.tau_s);
      const bool printed = p.form == snn::MembraneForm::Printed;
      const bool spiking = L.kind == snn::CellKind::LIF && std::isfinite(p.v_th);
      std::vector<double> spikes(n, 0.0);
      for (std::size_t a = 0; a < n; ++a) {
        if (!spiking) continue;
        const double x = v[l][a] - p.v_th;
        spikes[a] = smoothed ? sg.soft_gate(x) : (x > 0.0 ? 1.0 : 0.0);
      }
      const std::vector<double>& input = l == 0 ? pattern : s[l - 1];
      const double g = l == 0 ? gain[k] : 1.0;
      std::vector<double> v_next(n), i_next(n);
      for (std::size_t a = 0; a < n; ++a) {
        double u = printed ? alpha * (v[l][a] + i[l][a])
                           : p.v_rest + alpha * (v[l][a] - p.v_rest) + (1.0 - alpha) * i[l][a];
        if (spiking) {
          if (p.reset == snn::ResetMode::ToRest) {
            u = (1.0 - spikes[a]) * u + spikes[a] * p.v_rest;
          } else {
            u -= spikes[a] * p.v_th;
          }
        }
        v_next[a] = u;
        double syn = 0.0;
        for (std::size_t j = 0; j < input.size(); ++j) {
          syn += L.w_in(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) * g * input[j];
        }
        if (L.recurrent()) {
          for (std::size_t j = 0; j < n; ++j) {
            syn += L.w_rec(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) * spikes[j];
          }
        }
        i_next[a] = beta * i[l][a] + syn;
      }
      v[l] = std::move(v_next);
      i[l] = std::move(i_next);
      s[l] = std::move(spikes);
    }
  }
  return v.back();
}

inline double reference_ce(const std::vector<double>& v, int target) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double z = 0.0;
  for (double x : v) z += std::exp(x - mx);
  return std::log(z) - (v[static_cast<std::size_t>(target)] - mx);
}

/// Mean cross-entropy over a batch of (pattern, target) samples.
inline double reference_loss(const snn::Network<double>& net, const std::vector<std::vector<double>>& patterns,
                             const std::vector<int>& targets, const std::vector<double>& gain,
                             const snn::SurrogateSpec& sg) {
  double total = 0.0;
  for (std::size_t b = 0; b < patterns.size(); ++b) {
    total += reference_ce(reference_forward(net, patterns[b], gain, true, sg), targets[b]);
  }
  return total / static_cast<double>(patterns.size());
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// Compares BPTT gradients on the smoothed network with central differences
/// of the reference simulator. Relative error is |a-b| / max(|a|, |b|, floor).
GradCheckResult gradient_check(snn::Network<double> net, const std::vector<std::vector<double>>& patterns,
                               const std::vector<int>& targets, const std::vector<double>& gain,
                               const snn::SurrogateSpec& sg, double eps = 1e-4, double floor = 1e-6);

/// Random 4-3-2 toy net (recurrent LIF hidden, LI readout) and inputs.
struct ToyProblem {
  snn::Network<double> net;
  std::vector<std::vector<double>> patterns;
  std::vector<int> targets;
  std::vector<double> gain;
};
ToyProblem make_toy_problem(std::uint64_t seed, int steps, snn::ResetMode reset = snn::ResetMode::ToRest,
                            snn::MembraneForm form = snn::MembraneForm::Printed);

}  // namespace spikeq::testing

#endif  // SPIKEQ_TESTS_REFERENCE_SNN_HPP
