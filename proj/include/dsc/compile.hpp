#pragma once

#include <map>
#include <vector>

#include "dsc/circuit.hpp"
#include "dsc/lattice.hpp"
#include "dsc/schedule.hpp"

namespace dsc {

struct ExperimentSpec {
  const DeformedLattice* lattice = nullptr;
  std::vector<HalmaAssignment> halma;
  std::vector<GlobalRoundPlan> plan;
  Basis memory_basis = Basis::Z;
  bool stability = false;  // timelike observable instead of a logical string
};

// Lowers a round plan to a clean tick-layered circuit with detectors and the
// experiment observable.
Circuit lower(const ExperimentSpec& spec);

// Representative of the logical operator of `basis` on the deformed patch,
// avoiding disabled qubits. Checks of routed defective ancillas (measured by
// a rover, absent from dl.checks) are passed in `extra`. Throws when the
// patch is degenerate.
struct ExtraCheck {
  Coord home;
  Basis basis;
  std::vector<Coord> support;
};
std::vector<Coord> logical_support(const DeformedLattice& dl, Basis basis,
                                   const std::vector<ExtraCheck>& extra = {});

// Appends the memory observable (parity of final data measurements along a
// logical representative) to a lowered circuit.
void annotate_observable(Circuit& c, const DeformedLattice& dl, Basis basis,
                         const std::vector<ExtraCheck>& extra = {});

}  // namespace dsc
