#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dsc/circuit.hpp"
#include "dsc/geom.hpp"
#include "dsc/lattice.hpp"

namespace dsc {

enum class RoundType : uint8_t { W, V, Lambda, M, III, Regular, GaugeX, GaugeZ };

const char* round_type_name(RoundType t);
RoundType round_type_from_name(const std::string& s);

// Allowed successions of routed-round types.
bool legal_transition(RoundType prev, RoundType next);

enum class BasisLabel : uint8_t { Init, XRound, ZRound };

struct GlobalRoundPlan {
  int index = 0;
  ZOrder z;
  BasisLabel basis = BasisLabel::Init;
  std::map<Coord, RoundType> per_defect;
};

// One ancilla defect handled by routing.
struct HalmaAssignment {
  Coord defect;
  Basis basis = Basis::X;
  Frame frame;
  bool boundary = false;
  Coord partner{};  // boundary case: the ancilla that borrows the check
  bool alternation_group = false;  // true: active only in B cycles
};

// Relative geometry of a bulk routed defect. Names follow the role each
// ancilla plays: "mover" is swapped toward the defect support, "stager"
// parks a support qubit for the roving check, "returner" swaps it back.
struct BulkGeometry {
  Coord x0;                  // defective ancilla
  Coord n, e, w, s;          // support data (frame compass)
  Coord z1, z2, z3, z4;      // surrounding opposite-basis ancillas
  Coord z2_n, z2_e;          // outer data of z2 (frame N/E of it)
  Coord z4_e, z4_s;          // outer data of z4
  static BulkGeometry make(Coord defect, Basis defect_basis, const Frame& f);
  std::vector<Coord> footprint() const;
};

// One overlay operation; tick -1 lands in the previous round's measure tick,
// tick 5 in the next round's first tick.
struct OverlayOp {
  int tick = 0;
  Op op = Op::CNOT;
  Coord a, b;
  bool has_b = false;
  bool tagged = false;
  Coord tag;  // stabilizer identity for measurements
};

struct RoundOverlay {
  RoundType type = RoundType::III;
  std::vector<OverlayOp> ops;
  std::set<Coord> suppressed;  // ancilla homes with no regular program this round
};

// Overlay builders. `staged` reflects whether the defect region is in the
// displaced configuration on entry; `next` controls routing and reset bases.
RoundOverlay halma_overlay(const DeformedLattice& dl, const HalmaAssignment& a,
                           RoundType type, bool staged_entry, RoundType next);

// Spec-level wrappers for the canonical bulk case.
RoundOverlay w_round(const DeformedLattice& dl, const HalmaAssignment& a, const ZOrder& z);
RoundOverlay v_round(const DeformedLattice& dl, const HalmaAssignment& a, const ZOrder& z,
                     RoundType prev);
RoundOverlay boundary_v_round(const DeformedLattice& dl, const HalmaAssignment& a, const ZOrder& z);
// Reverses a W or V overlay into the matching M or Lambda overlay.
RoundOverlay reverse_round(const RoundOverlay& fwd);

// Per-defect round-type stream for an R-round experiment, Table-style:
// round 0 initialises, then the four-round cycle; the tail is padded so the
// final configuration is regular.
std::vector<RoundType> defect_round_stream(int rounds, int v_phase);

// Builds the full timeline. Defects with alternation_group false run in A
// cycles, true in B cycles (with reconfiguration buffers); when no group-B
// defects exist the plain four-round cycle is produced.
std::vector<GlobalRoundPlan> xxzz_cycle(const std::vector<HalmaAssignment>& defects, int rounds);

std::string plan_json(const std::vector<GlobalRoundPlan>& plan);
std::vector<GlobalRoundPlan> plan_from_json(const std::string& text);

// Checks one plan round for routing overlap between defects.
void check_no_routing_overlap(const DeformedLattice& dl,
                              const std::vector<HalmaAssignment>& defects,
                              const std::vector<GlobalRoundPlan>& plan);

}  // namespace dsc
