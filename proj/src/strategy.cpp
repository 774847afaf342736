#include "dsc/strategy.hpp"

#include <algorithm>
#include <stdexcept>

#include "dsc/util.hpp"
#include "json.hpp"

namespace dsc {

std::vector<Coord> vicinity(const Lattice& lat, Coord defect, int radius) {
  std::vector<Coord> out;
  for (int dx = -radius; dx <= radius; ++dx)
    for (int dy = -(radius - std::abs(dx)); dy <= radius - std::abs(dx); ++dy) {
      Coord c{defect.x + dx, defect.y + dy};
      if (c == defect) continue;
      if (lat.exists(c)) out.push_back(c);
    }
  return out;
}

namespace {

std::optional<Coord> boundary_partner(const Lattice& lat, Coord defect) {
  auto supp = lat.neighbors(defect);
  if (supp.size() != 2) return std::nullopt;
  for (Coord p : lat.neighbors(supp[0])) {
    if (p == defect || !lat.is_ancilla(p)) continue;
    auto ps = lat.neighbors(p);
    if (std::find(ps.begin(), ps.end(), supp[1]) != ps.end()) return p;
  }
  return std::nullopt;
}

bool helper_usable(const DeformedLattice& dl, Coord c) {
  return dl.base.exists(c) && dl.base.is_ancilla(c) && !dl.defects.is_defective(c) &&
         !dl.dropped_ancillas.count(c);
}

}  // namespace

bool routing_feasible(const DeformedLattice& dl, Coord defect, const Frame& f) {
  const Lattice& lat = dl.base;
  if (!lat.is_ancilla(defect)) return false;
  auto supp = lat.neighbors(defect);
  if (supp.size() == 2) {
    auto partner = boundary_partner(lat, defect);
    if (!partner || !helper_usable(dl, *partner)) return false;
    HalmaAssignment a{defect, lat.ancilla_basis(defect), f, true, *partner};
    try {
      (void)halma_overlay(dl, a, RoundType::V, true, RoundType::Lambda);
    } catch (const std::exception&) {
      return false;
    }
    return true;
  }
  if (supp.size() != 4) return false;
  BulkGeometry g = BulkGeometry::make(defect, lat.ancilla_basis(defect), f);
  if (!dl.data_enabled(g.e) || !dl.data_enabled(g.n)) return false;
  for (Coord anc : {g.z1, g.z2, g.z4})
    if (!helper_usable(dl, anc)) return false;
  return true;
}

bool jointly_schedulable(const DeformedLattice& dl, const HalmaAssignment& a,
                         const HalmaAssignment& b) {
  ZOrder oa = order_of_frame(a.frame), ob = order_of_frame(b.frame);
  if (!(oa == ob || oa == ob.reversed())) return false;
  std::vector<HalmaAssignment> both{a, b};
  std::vector<GlobalRoundPlan> plan;
  try {
    plan = xxzz_cycle(both, 9);
  } catch (const std::exception&) {
    return false;
  }
  // walk the cycle with each defect's staging state, collecting op claims
  std::map<Coord, bool> staged;
  std::map<Coord, std::vector<RoundOverlay>> ovs;
  for (const auto& d : both) staged[d.defect] = false;
  for (size_t r = 0; r < plan.size(); ++r) {
    std::map<std::pair<int, Coord>, Coord> claims;  // (tick, coord) -> defect
    std::map<Coord, Coord> measured;                // measured home -> defect
    std::map<Coord, Coord> suppressed;              // silent home -> defect
    for (const auto& d : both) {
      RoundType t = plan[r].per_defect.at(d.defect);
      RoundType next = r + 1 < plan.size() ? plan[r + 1].per_defect.at(d.defect) : RoundType::III;
      RoundOverlay ov;
      try {
        ov = halma_overlay(dl, d, t, staged[d.defect], next);
      } catch (const std::exception&) {
        return false;
      }
      staged[d.defect] = !d.boundary &&
                         (t == RoundType::V || t == RoundType::Lambda ||
                          (t == RoundType::W && next == RoundType::V));
      if (t == RoundType::M || t == RoundType::III) staged[d.defect] = false;
      for (Coord s : ov.suppressed) {
        auto [it, fresh] = suppressed.try_emplace(s, d.defect);
        (void)it;
      }
      for (const auto& op : ov.ops) {
        for (Coord q : {op.a, op.b}) {
          if (q == op.b && !op.has_b) continue;
          auto [it, fresh] = claims.try_emplace({op.tick, q}, d.defect);
          if (!fresh && it->second != d.defect) return false;
        }
        if (is_measurement(op.op)) measured[op.tag] = d.defect;
      }
    }
    // measuring a check the other defect suppressed reads displaced data
    for (const auto& [home, owner] : measured) {
      auto it = suppressed.find(home);
      if (it != suppressed.end() && it->second != owner) return false;
    }
  }
  return true;
}

std::map<Coord, DefectStatus> classify(const DeformedLattice& dl) {
  const Lattice& lat = dl.base;
  std::map<Coord, DefectStatus> out;
  std::vector<Coord> anc_defects;
  for (Coord c : dl.defects.qubits)
    if (lat.is_ancilla(c)) anc_defects.push_back(c);

  for (Coord c : anc_defects) {
    DefectStatus st;
    for (const Frame& f : all_frames())
      if (routing_feasible(dl, c, f)) st.feasible_frames.push_back(f);
    st.possible = !st.feasible_frames.empty();
    out[c] = st;
  }

  // pairwise routing conflicts: a defect conflicts when no frame pairing
  // with some neighbour is jointly schedulable at one order pair
  auto assignment_of = [&](Coord c, const Frame& f) {
    HalmaAssignment h{c, lat.ancilla_basis(c), f};
    if (lat.neighbors(c).size() == 2) {
      h.boundary = true;
      if (auto p = boundary_partner(lat, c)) h.partner = *p;
    }
    return h;
  };
  for (Coord a : anc_defects) {
    if (!out[a].possible) continue;
    for (Coord b : anc_defects) {
      if (a == b || !out[b].possible) continue;
      if (std::abs(a.x - b.x) + std::abs(a.y - b.y) > 10) continue;
      bool compatible = false;
      for (const Frame& fa : out[a].feasible_frames) {
        for (const Frame& fb : out[b].feasible_frames) {
          if (compatible) break;
          if (jointly_schedulable(dl, assignment_of(a, fa), assignment_of(b, fb)))
            compatible = true;
        }
        if (compatible) break;
      }
      if (!compatible) out[a].conflict = true;
    }
  }
  return out;
}

namespace {

StrategyResult build_strategy(const Lattice& lat, const DefectSet& defects, bool use_routing) {
  DeformedLattice first = deform_boundary(lat, defects, use_routing);
  Strategy strat;
  std::set<Coord> superstab_disables;

  std::vector<Coord> anc_defects;
  for (Coord c : defects.qubits)
    if (lat.is_ancilla(c)) anc_defects.push_back(c);

  std::set<Coord> dead_qubits(defects.qubits.begin(), defects.qubits.end());
  for (const auto& [a, b] : defects.couplers) dead_qubits.insert(lat.is_data(a) ? a : b);

  for (Coord c : anc_defects) {
    bool isolated = true;
    for (Coord q : vicinity(lat, c)) {
      if (dead_qubits.count(q)) isolated = false;
      if (first.disabled_data.count(q)) isolated = false;
    }
    Handling method = Handling::Superstab;
    if (use_routing && isolated) {
      // prefer the canonical frame, then any frame on the default order pair
      std::optional<Frame> chosen;
      for (const Frame& f : all_frames()) {
        ZOrder o = order_of_frame(f);
        if (!(o == ZOrder::news() || o == ZOrder::news().reversed())) continue;
        if (routing_feasible(first, c, f)) {
          chosen = f;
          break;
        }
      }
      if (chosen) {
        method = Handling::Routed;
        HalmaAssignment a{c, lat.ancilla_basis(c), *chosen};
        if (lat.neighbors(c).size() == 2) {
          a.boundary = true;
          a.partner = *boundary_partner(lat, c);
        }
        strat.assignments.push_back(a);
      }
    }
    strat.ancilla_method[c] = method;
    if (method == Handling::Superstab)
      for (Coord q : lat.neighbors(c)) superstab_disables.insert(q);
  }

  // Re-deform with the superstabilizer disables folded in and the virtual
  // stabilizers pinned to the defects actually handled by routing.
  auto routed_boundary_set = [&]() {
    std::set<Coord> out;
    for (const auto& a : strat.assignments) out.insert(a.defect);
    return out;
  };
  std::set<Coord> rb = routed_boundary_set();
  DeformedLattice final_lat = deform_boundary(lat, defects, use_routing, superstab_disables, &rb);
  // drop routed assignments invalidated by the second deformation pass
  std::vector<HalmaAssignment> kept;
  for (auto& a : strat.assignments) {
    if (routing_feasible(final_lat, a.defect, a.frame)) {
      kept.push_back(a);
    } else {
      strat.ancilla_method[a.defect] = Handling::Superstab;
      for (Coord q : lat.neighbors(a.defect)) superstab_disables.insert(q);
    }
  }
  if (kept.size() != strat.assignments.size()) {
    strat.assignments = kept;
    rb = routed_boundary_set();
    final_lat = deform_boundary(lat, defects, use_routing, superstab_disables, &rb);
  } else {
    strat.assignments = kept;
  }
  return {final_lat, strat};
}

}  // namespace

StrategyResult baseline_strategy(const Lattice& lat, const DefectSet& defects) {
  return build_strategy(lat, defects, true);
}

StrategyResult superstab_strategy(const Lattice& lat, const DefectSet& defects) {
  return build_strategy(lat, defects, false);
}

bool post_select(const StrategyResult& r) {
  return r.strategy.all_routed() && !r.lattice.degenerate;
}

ApplicabilityStats applicability_stats(int d, double rate, int trials, uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  Lattice lat = build_lattice(d);
  size_t total = 0, single = 0, any = 0;
  for (int t = 0; t < trials; ++t) {
    DefectSet defs = sample_defects(lat, rate, hash_combine(seed, uint64_t(t)));
    // Whether routing can handle a defect is a geometric property of the
    // defect pattern; deformation choices made for other defects do not
    // enter the count.
    DeformedLattice dl;
    dl.base = lat;
    dl.defects = defs;
    for (Coord c : defs.qubits)
      if (lat.is_ancilla(c)) dl.halma_virtual.insert(c);
    auto status = classify(dl);
    for (const auto& [c, st] : status) {
      ++total;
      // order changes between cycles and alternation resolve conflicts
      if (st.possible) ++any;
      // a single four-round cycle at one fixed order handles the defect
      if (st.possible && !st.conflict) ++single;
    }
  }
  ApplicabilityStats out;
  out.defects = total;
  if (total) {
    out.single_order = double(single) / double(total);
    out.any_order = double(any) / double(total);
  }
  return out;
}

std::string strategy_json(const Strategy& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [c, m] : s.ancilla_method) {
    nlohmann::ordered_json e;
    e["method"] = m == Handling::Routed ? "routed"
                 : m == Handling::RoutedAlternating ? "routed_alternating" : "superstabilizer";
    for (const auto& a : s.assignments)
      if (a.defect == c) {
        e["order"] = order_of_frame(a.frame).str();
        if (a.boundary) e["partner"] = a.partner.str();
      }
    j[c.str()] = e;
  }
  return j.dump(2) + "\n";
}

}  // namespace dsc
