#pragma once

#include <string>

#include "dsc/circuit.hpp"

namespace dsc {

struct NoiseBudget {
  double p2 = 0;       // two-qubit depolarizing
  double p1 = 0;       // single-qubit depolarizing after 1q gates
  double p_idle = 0;   // per-tick idle depolarizing
  double p_meas = 0;   // measurement flip
  double p_reset = 0;  // reset flip

  // Default ratios parameterized by the two-qubit error rate.
  static NoiseBudget from_p2(double p2) {
    return {p2, p2 / 10, p2 / 10, 5 * p2 / 4, p2 / 2};
  }
  void validate() const;
  std::string json() const;
  static NoiseBudget from_json(const std::string& text);
};

// Inserts noise channels without touching tick structure or record indices.
// With perfect_init_final the first reset layer and the final data
// measurement layer stay noiseless.
Circuit apply_noise(const Circuit& clean, const NoiseBudget& budget,
                    bool perfect_init_final = true);

}  // namespace dsc
