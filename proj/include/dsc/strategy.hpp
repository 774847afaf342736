#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dsc/lattice.hpp"
#include "dsc/schedule.hpp"

namespace dsc {

enum class Handling : uint8_t { Routed, Superstab, RoutedAlternating };

struct DefectStatus {
  bool possible = false;            // feasible at some initial order
  bool conflict = false;            // feasible alone, but routing overlaps a neighbour
  std::vector<Frame> feasible_frames;
};

struct Strategy {
  std::map<Coord, Handling> ancilla_method;
  std::vector<HalmaAssignment> assignments;  // routed defects
  bool all_routed() const {
    for (const auto& [c, m] : ancilla_method)
      if (m == Handling::Superstab) return false;
    return true;
  }
};

// Diamond neighbourhood consulted by the baseline strategy.
std::vector<Coord> vicinity(const Lattice& lat, Coord defect, int radius = 4);

// Feasibility of routing a single ancilla defect at a given frame on the
// deformed patch (liveness of the staging path and helper ancillas).
bool routing_feasible(const DeformedLattice& dl, Coord defect, const Frame& f);

// Tick-level compatibility of two routed defects over one four-round cycle:
// no shared gate slots and no measurement of an ancilla the other defect
// needs silent.
bool jointly_schedulable(const DeformedLattice& dl, const HalmaAssignment& a,
                         const HalmaAssignment& b);

// Per-defect status computed by attempting schedule construction at all 8
// initial orders, plus pairwise routing-overlap detection.
std::map<Coord, DefectStatus> classify(const DeformedLattice& dl);

// Routed handling for isolated ancilla defects, superstabilizers elsewhere.
// Applies superstabilizer disabling and re-deforms; returns the final lattice
// alongside the strategy.
struct StrategyResult {
  DeformedLattice lattice;
  Strategy strategy;
};
StrategyResult baseline_strategy(const Lattice& lat, const DefectSet& defects);

// Superstabilizer handling for every ancilla defect (comparison arm).
StrategyResult superstab_strategy(const Lattice& lat, const DefectSet& defects);

// True when every ancilla defect is handled by routing.
bool post_select(const StrategyResult& r);

struct ApplicabilityStats {
  double single_order = 0;  // fraction applicable at the canonical order
  double any_order = 0;     // with order changes and alternation
  size_t defects = 0;
};
ApplicabilityStats applicability_stats(int d, double rate, int trials, uint64_t seed);

std::string strategy_json(const Strategy& s);

}  // namespace dsc
