#include "doctest.h"

#include <iostream>

#include "dsc/compile.hpp"
#include "dsc/lattice.hpp"
#include "dsc/noise.hpp"
#include "dsc/schedule.hpp"
#include "dsc/sim.hpp"
#include "dsc/strategy.hpp"

using namespace dsc;

namespace {

DeformedLattice defect_free(int d) {
  return deform_boundary(build_lattice(d), DefectSet{}, true);
}

// Deform + strategy for a single listed defect set.
StrategyResult routed(int d, std::vector<Coord> defects) {
  DefectSet defs;
  defs.qubits = std::move(defects);
  defs.rate = 0;
  defs.seed = 0;
  return baseline_strategy(build_lattice(d), defs);
}

Circuit lower_memory(const StrategyResult& sr, int rounds, Basis basis) {
  ExperimentSpec spec;
  spec.lattice = &sr.lattice;
  spec.halma = sr.strategy.assignments;
  spec.plan = xxzz_cycle(sr.strategy.assignments, rounds);
  spec.memory_basis = basis;
  return lower(spec);
}

void expect_deterministic(const Circuit& c) {
  auto result = tableau_run(c);
  size_t bad = 0;
  for (const auto& det : result.detectors)
    if (!det.deterministic || det.value) ++bad;
  for (const auto& o : result.observables)
    if (!o.deterministic || o.value) ++bad;
  CHECK(bad == 0);
  CHECK(result.detectors.size() > 0);
}

Coord central_x_ancilla(const Lattice& lat) {
  Coord best{-1, -1};
  int best_score = 1 << 30;
  for (Coord a : lat.ancilla_qubits()) {
    if (lat.ancilla_basis(a) != Basis::X || lat.neighbors(a).size() != 4) continue;
    int cx = lat.d, cy = lat.d;
    int score = std::abs(a.x - cx) + std::abs(a.y - cy);
    if (score < best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("legal transitions follow the round automaton") {
  using RT = RoundType;
  CHECK(legal_transition(RT::W, RT::V));
  CHECK(legal_transition(RT::W, RT::M));
  CHECK(!legal_transition(RT::V, RT::W));
  CHECK(legal_transition(RT::V, RT::Lambda));
  CHECK(!legal_transition(RT::V, RT::V));
  CHECK(legal_transition(RT::Lambda, RT::M));
  CHECK(legal_transition(RT::Lambda, RT::V));
  CHECK(legal_transition(RT::M, RT::W));
  CHECK(legal_transition(RT::M, RT::III));
  CHECK(legal_transition(RT::III, RT::III));
  CHECK(legal_transition(RT::III, RT::W));
  CHECK(!legal_transition(RT::W, RT::W));
  CHECK(!legal_transition(RT::M, RT::V));
}

TEST_CASE("four-round cycle reproduces the reference table") {
  // one X-ancilla defect and one Z-ancilla defect, far apart on d=9
  Lattice lat = build_lattice(9);
  Coord xd{4, 4};
  REQUIRE(lat.ancilla_basis(xd) == Basis::X);
  Coord zd{14, 12};
  REQUIRE(lat.is_ancilla(zd));
  REQUIRE(lat.ancilla_basis(zd) == Basis::Z);
  std::vector<HalmaAssignment> defs{{xd, Basis::X, Frame{}}, {zd, Basis::Z, Frame{}}};
  auto plan = xxzz_cycle(defs, 9);
  using RT = RoundType;
  CHECK(plan[0].z.str() == "NEWS");
  CHECK(plan[0].per_defect.at(xd) == RT::W);
  CHECK(plan[0].per_defect.at(zd) == RT::W);
  struct Row {
    const char* basis;
    RT x;
    RT z;
    const char* order;
  };
  Row rows[4] = {{"X", RT::V, RT::M, "SWEN"},
                 {"X", RT::Lambda, RT::W, "NEWS"},
                 {"Z", RT::M, RT::V, "SWEN"},
                 {"Z", RT::W, RT::Lambda, "NEWS"}};
  for (int r = 1; r <= 4; ++r) {
    CAPTURE(r);
    CHECK(plan[r].z.str() == rows[r - 1].order);
    CHECK(plan[r].basis == (rows[r - 1].basis[0] == 'X' ? BasisLabel::XRound : BasisLabel::ZRound));
    CHECK(plan[r].per_defect.at(xd) == rows[r - 1].x);
    CHECK(plan[r].per_defect.at(zd) == rows[r - 1].z);
  }
  // round 5 starts the next cycle
  CHECK(plan[5].per_defect.at(xd) == RT::V);
  // transitions legal throughout
  for (size_t r = 1; r < plan.size(); ++r)
    for (Coord c : {xd, zd})
      CHECK(legal_transition(plan[r - 1].per_defect.at(c), plan[r].per_defect.at(c)));
}

TEST_CASE("no defects: cycle degenerates to regular rounds") {
  auto plan = xxzz_cycle({}, 5);
  CHECK(plan.size() == 5);
  for (const auto& p : plan) CHECK(p.per_defect.empty());
}

TEST_CASE("W overlay matches the step list") {
  auto sr = routed(6, {{6, 6}});
  REQUIRE(sr.strategy.assignments.size() == 1);
  const auto& a = sr.strategy.assignments[0];
  RoundOverlay w = w_round(sr.lattice, a, order_of_frame(a.frame));
  // step 4 (tick 3) holds exactly one CXSWAP, landing the mover on the
  // support data qubit south of it
  int cxswaps_t3 = 0, cxswaps_t4 = 0;
  BulkGeometry g = BulkGeometry::make(a.defect, a.basis, a.frame);
  for (const auto& op : w.ops) {
    if (op.op != Op::CXSWAP) continue;
    if (op.tick == 3) {
      ++cxswaps_t3;
      CHECK(((op.a == g.e && op.b == g.z2) || (op.a == g.z2 && op.b == g.e)));
    }
    if (op.tick == 4) ++cxswaps_t4;
  }
  CHECK(cxswaps_t3 == 1);
  CHECK(cxswaps_t4 == 1);  // the returner's staging swap during the measure tick
  // total CXSWAP count per W round is 2 in the bulk
  int total = 0;
  for (const auto& op : w.ops)
    if (op.op == Op::CXSWAP || op.op == Op::SWAPCX) ++total;
  CHECK(total == 2);
}

TEST_CASE("V overlay uses exactly 4 routing gates and disables the ring") {
  auto sr = routed(6, {{6, 6}});
  const auto& a = sr.strategy.assignments[0];
  RoundOverlay v = v_round(sr.lattice, a, order_of_frame(a.frame).reversed(), RoundType::W);
  int swapish = 0;
  for (const auto& op : v.ops)
    if (op.op == Op::CXSWAP || op.op == Op::SWAPCX) ++swapish;
  CHECK(swapish == 4);
  CHECK(v.suppressed.size() == 5);  // defect plus the four surrounding ancillas
  CHECK_THROWS(v_round(sr.lattice, a, order_of_frame(a.frame).reversed(), RoundType::V));
  CHECK_THROWS(v_round(sr.lattice, a, order_of_frame(a.frame).reversed(), RoundType::M));

  RoundOverlay lam = halma_overlay(sr.lattice, a, RoundType::Lambda, true, RoundType::M);
  swapish = 0;
  for (const auto& op : lam.ops)
    if (op.op == Op::CXSWAP || op.op == Op::SWAPCX) ++swapish;
  CHECK(swapish == 4);

  RoundOverlay m = halma_overlay(sr.lattice, a, RoundType::M, true, RoundType::W);
  swapish = 0;
  for (const auto& op : m.ops)
    if (op.op == Op::CXSWAP || op.op == Op::SWAPCX) ++swapish;
  CHECK(swapish == 2);
}

TEST_CASE("reversing a reversed round returns the original overlay") {
  auto sr = routed(6, {{6, 6}});
  const auto& a = sr.strategy.assignments[0];
  for (RoundType t : {RoundType::W, RoundType::V}) {
    RoundOverlay fwd = halma_overlay(sr.lattice, a, t, t == RoundType::V, RoundType::V);
    RoundOverlay back = reverse_round(reverse_round(fwd));
    auto core = [](const RoundOverlay& o) {
      std::vector<std::tuple<int, int, Coord, Coord>> v;
      for (const auto& op : o.ops)
        if (op.op != Op::H) v.push_back({op.tick, int(op.op), op.a, op.b});
      std::sort(v.begin(), v.end());
      return v;
    };
    CHECK(core(back) == core(fwd));
  }
}

TEST_CASE("defect-free circuits are deterministic and correctly sized") {
  for (int d : {3, 5}) {
    for (Basis basis : {Basis::Z, Basis::X}) {
      CAPTURE(d);
      auto dl = defect_free(d);
      ExperimentSpec spec;
      spec.lattice = &dl;
      spec.plan = xxzz_cycle({}, 3);
      spec.memory_basis = basis;
      Circuit c = lower(spec);
      expect_deterministic(c);
      if (basis == Basis::Z && d == 3) {
        // 3 rounds x 5 ticks + init + final
        CHECK(c.count_op(Op::Tick) == 16);
        CHECK(c.num_measurements() == 3 * 8 + 9);
      }
    }
  }
}

TEST_CASE("single bulk ancilla defect timelines are deterministic") {
  for (int d : {4, 5, 6}) {
    CAPTURE(d);
    Lattice lat = build_lattice(d);
    Coord defect = central_x_ancilla(lat);
    REQUIRE(defect.x >= 0);
    auto sr = routed(d, {defect});
    REQUIRE(sr.strategy.assignments.size() == 1);
    for (Basis basis : {Basis::Z, Basis::X}) {
      Circuit c = lower_memory(sr, 2 * d, basis);
      expect_deterministic(c);
    }
  }
}

TEST_CASE("single bulk Z-ancilla defect is the mirrored construction") {
  Lattice lat = build_lattice(6);
  Coord defect{6, 4};
  REQUIRE(lat.is_ancilla(defect));
  REQUIRE(lat.ancilla_basis(defect) == Basis::Z);
  auto sr = routed(6, {defect});
  REQUIRE(sr.strategy.assignments.size() == 1);
  Circuit c = lower_memory(sr, 9, Basis::Z);
  expect_deterministic(c);
}

TEST_CASE("boundary ancilla defect handled by the borrowed partner") {
  Lattice lat = build_lattice(3);
  Coord defect{4, 0};
  REQUIRE(lat.is_ancilla(defect));
  REQUIRE(lat.neighbors(defect).size() == 2);
  auto sr = routed(3, {defect});
  REQUIRE(sr.strategy.assignments.size() == 1);
  CHECK(sr.strategy.assignments[0].boundary);
  CHECK(sr.strategy.assignments[0].partner == Coord{4, 2});
  CHECK(sr.lattice.disabled_data.empty());
  for (Basis basis : {Basis::Z, Basis::X}) {
    Circuit c = lower_memory(sr, 7, basis);
    expect_deterministic(c);
  }
}

TEST_CASE("two separated defects interleave as in the two-defect table") {
  Lattice lat = build_lattice(7);
  Coord a{4, 6}, b{10, 8};
  REQUIRE(lat.ancilla_basis(a) == Basis::Z);
  REQUIRE(lat.ancilla_basis(b) == Basis::Z);
  // one defect on the NEWS frame, the other on the reversed frame
  std::vector<HalmaAssignment> defs{{a, Basis::Z, Frame{}},
                                    {b, Basis::Z, *frame_of_order(ZOrder::parse("SWEN"))}};
  auto plan = xxzz_cycle(defs, 10);
  int v_a = -1, v_b = -1;
  for (const auto& p : plan) {
    if (v_a < 0 && p.per_defect.at(a) == RoundType::V) v_a = p.index;
    if (v_b < 0 && p.per_defect.at(b) == RoundType::V) v_b = p.index;
  }
  CHECK(v_a >= 1);
  CHECK(v_b >= 1);
  CHECK(v_a != v_b);
  // both defects get a full cycle every four rounds
  DefectSet ds;
  ds.qubits = {a, b};
  DeformedLattice dl = deform_boundary(lat, ds, true);
  ExperimentSpec spec;
  spec.lattice = &dl;
  spec.halma = defs;
  spec.plan = plan;
  spec.memory_basis = Basis::Z;
  Circuit c = lower(spec);
  expect_deterministic(c);
}

TEST_CASE("mis-ordered gates are flagged as nondeterministic") {
  auto dl = defect_free(3);
  ExperimentSpec spec;
  spec.lattice = &dl;
  spec.plan = xxzz_cycle({}, 3);
  spec.memory_basis = Basis::Z;
  Circuit c = lower(spec);
  // swap the first two CNOT layers to break the pairwise ordering rule
  std::vector<size_t> cnot_layers;
  for (size_t i = 0; i < c.instructions.size(); ++i)
    if (c.instructions[i].op == Op::CNOT) cnot_layers.push_back(i);
  REQUIRE(cnot_layers.size() >= 2);
  std::swap(c.instructions[cnot_layers[0]], c.instructions[cnot_layers[1]]);
  auto result = tableau_run(c);
  bool all_det = true;
  for (const auto& det : result.detectors) all_det &= det.deterministic;
  CHECK(!all_det);
}

TEST_CASE("every round contributes five ticks and no qubit is double-booked") {
  auto sr = routed(6, {{6, 6}});
  Circuit c = lower_memory(sr, 8, Basis::Z);
  CHECK_NOTHROW(validate_ticks(c));
  // 8 rounds x 5 ticks + init + final
  CHECK(c.count_op(Op::Tick) == 8 * 5 + 1);
}

TEST_CASE("plan json round-trips") {
  auto sr = routed(6, {{6, 6}});
  auto plan = xxzz_cycle(sr.strategy.assignments, 6);
  std::string text = plan_json(plan);
  auto back = plan_from_json(text);
  REQUIRE(back.size() == plan.size());
  for (size_t i = 0; i < plan.size(); ++i) {
    CHECK(back[i].z == plan[i].z);
    CHECK(back[i].per_defect == plan[i].per_defect);
  }
}
