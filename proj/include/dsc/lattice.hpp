#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsc/geom.hpp"

namespace dsc {

enum class Role : uint8_t { Data, AncillaX, AncillaZ };
enum class Basis : uint8_t { X, Z };

inline Basis opposite(Basis b) { return b == Basis::X ? Basis::Z : Basis::X; }
inline char basis_char(Basis b) { return b == Basis::X ? 'X' : 'Z'; }

// Which pair of opposite boundaries hosts the X-type boundary ancillas.
// XTopBottom: rows y=0 and y=2d are X-type (the default used throughout).
enum class BoundaryOrientation : uint8_t { XTopBottom, XLeftRight };

// A rotated surface-code patch. Data qubits live at odd-odd coordinates,
// ancillas at even-even; couplers join diagonal neighbours.
struct Lattice {
  int d = 0;                 // code distance (square patch) or radius (diamond)
  bool diamond = false;      // uniform-boundary patch for stability runs
  BoundaryOrientation orient = BoundaryOrientation::XTopBottom;
  std::map<Coord, Role> qubits;

  bool exists(Coord c) const { return qubits.count(c) != 0; }
  Role role(Coord c) const { return qubits.at(c); }
  bool is_data(Coord c) const { return exists(c) && qubits.at(c) == Role::Data; }
  bool is_ancilla(Coord c) const { return exists(c) && qubits.at(c) != Role::Data; }
  Basis ancilla_basis(Coord c) const {
    return qubits.at(c) == Role::AncillaX ? Basis::X : Basis::Z;
  }
  std::vector<Coord> data_qubits() const;
  std::vector<Coord> ancilla_qubits() const;
  // Data neighbours of an ancilla (or ancilla neighbours of a data qubit).
  std::vector<Coord> neighbors(Coord c) const;
  std::vector<std::pair<Coord, Coord>> couplers() const;

  // True when the coordinate sits on the outermost data ring of a square
  // patch against an X-type (resp. Z-type) boundary.
  bool on_x_margin(Coord data) const;
  bool on_z_margin(Coord data) const;
};

Lattice build_lattice(int d, BoundaryOrientation orient = BoundaryOrientation::XTopBottom);
// Patch whose boundaries are all X-type: the product of every Z stabilizer is
// identity, which anchors the timelike observable of stability runs.
Lattice build_stability_patch(int k);

struct DefectSet {
  std::vector<Coord> qubits;                       // defective qubits
  std::vector<std::pair<Coord, Coord>> couplers;   // defective couplers
  double rate = 0.0;
  uint64_t seed = 0;
  bool is_defective(Coord c) const;
};

DefectSet sample_defects(const Lattice& lat, double rate, uint64_t seed,
                         double coupler_rate = 0.0);

// A parity check actually measured on the deformed patch. Full stabilizers
// have region < 0; truncated checks belong to a superstabilizer region.
struct Check {
  Coord home;
  Basis basis = Basis::Z;
  std::vector<Coord> support;  // sorted, enabled data only
  int region = -1;
  bool is_gauge() const { return region >= 0; }
};

struct GaugeOp {
  Coord home;
  std::vector<Coord> support;
};

struct SuperstabilizerRegion {
  int id = 0;
  std::vector<Coord> dead_data;  // defective or disabled data in the hole
  std::vector<GaugeOp> x_gauges;
  std::vector<GaugeOp> z_gauges;
  std::vector<Coord> merged_support_x;  // support of the X superstabilizer
  std::vector<Coord> merged_support_z;
  bool touches_margin = false;
  bool oversize = false;  // superstabilizer weight exceeded the cap
};

struct DeformedLattice {
  Lattice base;
  DefectSet defects;
  std::set<Coord> disabled_data;     // disabled on top of the defective set
  std::set<Coord> dropped_ancillas;  // alive ancillas whose check was removed
  std::set<Coord> halma_virtual;     // boundary ancilla defects kept functional
  std::vector<Check> checks;
  std::vector<SuperstabilizerRegion> regions;
  bool degenerate = false;

  bool data_enabled(Coord c) const;
  bool ancilla_alive(Coord c) const;
  std::vector<Coord> enabled_data() const;
  const Check* check_at(Coord home) const;
};

// Boundary deformation: disable boundary data until every enabled boundary
// data qubit has the required stabilizer coverage. With halma_aware set,
// boundary ancilla defects whose partner ancilla is intact count as
// functional and trigger no disabling.
DeformedLattice deform_boundary(const Lattice& lat, const DefectSet& defects,
                                bool halma_aware,
                                const std::set<Coord>& extra_disabled = {},
                                const std::set<Coord>* routed_boundary = nullptr);

// Recompute checks and superstabilizer regions from the current dead sets.
// Returns the regions (also stored in the lattice).
std::vector<SuperstabilizerRegion> build_superstabilizers(DeformedLattice& dl,
                                                          int weight_cap = 24);

// JSON per the external interface: {"d","seed","rate","defective_qubits","disabled"}.
std::string lattice_json(const DeformedLattice& dl);
DeformedLattice lattice_from_json(const std::string& text, bool halma_aware);

}  // namespace dsc
