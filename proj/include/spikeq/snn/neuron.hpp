#ifndef SPIKEQ_SNN_NEURON_HPP
#define SPIKEQ_SNN_NEURON_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "spikeq/common.hpp"

namespace spikeq::snn {

enum class CellKind : std::uint8_t { LIF = 0, LI = 1 };

enum class ResetMode : std::uint8_t {
  ToRest = 0,             // v <- v_rest after a spike
  SubtractThreshold = 1,  // v <- v - v_th after a spike
};

enum class MembraneForm : std::uint8_t {
  Printed = 0,       // v' = alpha * (v + i)
  Conventional = 1,  // v' = v_rest + alpha * (v - v_rest) + (1 - alpha) * i
};

ResetMode reset_mode_from_string(std::string_view s);
MembraneForm membrane_form_from_string(std::string_view s);
std::string_view to_string(ResetMode m);
std::string_view to_string(MembraneForm m);

/// Discrete-time neuron constants. Time constants and dt share one unit.
struct NeuronParams {
  double tau_m = 10.0;
  double tau_s = 5.0;
  double v_th = 1.0;
  double v_rest = 0.0;
  double dt = 1.0;
  ResetMode reset = ResetMode::ToRest;
  MembraneForm form = MembraneForm::Printed;

  double alpha() const { return std::exp(-dt / tau_m); }
  double beta() const { return std::exp(-dt / tau_s); }
  /// Weight of v and of i in the pre-reset membrane update.
  double v_coeff() const { return alpha(); }
  double i_coeff() const { return form == MembraneForm::Printed ? alpha() : 1.0 - alpha(); }
  /// Constant term of the membrane update.
  double v_offset() const { return form == MembraneForm::Printed ? 0.0 : v_rest * (1.0 - alpha()); }

  void validate() const;

  /// Hidden-layer LIF defaults: tau_m 10, tau_s 5, v_th 1.
  static NeuronParams lif_defaults();
  /// Readout LI defaults: tau_m 100, tau_s 1, v_th 1000.
  static NeuronParams li_defaults();
};

/// Fast-sigmoid surrogate for the derivative of the spike nonlinearity.
struct SurrogateSpec {
  double slope = 100.0;

  /// g(x) = 1 / (slope |x| + 1)^2, x = v - v_th.
  double derivative(double x) const {
    const double d = slope * std::abs(x) + 1.0;
    return 1.0 / (d * d);
  }
  /// Smooth gate whose derivative is exactly derivative(x); 1/2 at threshold.
  double soft_gate(double x) const { return 0.5 + x / (slope * std::abs(x) + 1.0); }
};

/// Spike nonlinearity used by the forward pass.
enum class GateMode : std::uint8_t {
  Heaviside = 0,
  Smoothed = 1,  // SurrogateSpec::soft_gate, for gradient checking
};

}  // namespace spikeq::snn

#endif  // SPIKEQ_SNN_NEURON_HPP
