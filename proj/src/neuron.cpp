#include "spikeq/snn/neuron.hpp"

namespace spikeq::snn {

ResetMode reset_mode_from_string(std::string_view s) {
  if (s == "to_rest") return ResetMode::ToRest;
  if (s == "subtract") return ResetMode::SubtractThreshold;
  throw ConfigError("unknown reset mode '" + std::string(s) + "' (expected to_rest|subtract)");
}

MembraneForm membrane_form_from_string(std::string_view s) {
  if (s == "printed") return MembraneForm::Printed;
  if (s == "conventional") return MembraneForm::Conventional;
  throw ConfigError("unknown membrane form '" + std::string(s) + "' (expected printed|conventional)");
}

std::string_view to_string(ResetMode m) { return m == ResetMode::ToRest ? "to_rest" : "subtract"; }

std::string_view to_string(MembraneForm m) { return m == MembraneForm::Printed ? "printed" : "conventional"; }

void NeuronParams::validate() const {
  if (!(tau_m > 0.0) || !(tau_s > 0.0) || !(dt > 0.0)) {
    throw ConfigError("neuron time constants and dt must be positive");
  }
  if (!std::isfinite(tau_m) || !std::isfinite(tau_s) || !std::isfinite(dt) || !std::isfinite(v_rest) ||
      std::isnan(v_th)) {
    throw ConfigError("neuron parameters must be finite");
  }
}

NeuronParams NeuronParams::lif_defaults() { return NeuronParams{10.0, 5.0, 1.0, 0.0, 1.0}; }

NeuronParams NeuronParams::li_defaults() { return NeuronParams{100.0, 1.0, 1000.0, 0.0, 1.0}; }

}  // namespace spikeq::snn
