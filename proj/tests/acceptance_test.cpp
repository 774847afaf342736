// Acceptance suite: one pass/fail line per criterion, exit code counts
// failures. Expected runtime is dominated by the sampling criteria; the
// whole suite finishes within an hour or two on a desktop.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dsc/compile.hpp"
#include "dsc/decode.hpp"
#include "dsc/experiments.hpp"
#include "dsc/lattice.hpp"
#include "dsc/noise.hpp"
#include "dsc/sim.hpp"
#include "dsc/strategy.hpp"
#include "dsc/util.hpp"

using namespace dsc;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  (%s)\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double elapsed(clock_t t0) { return double(clock() - t0) / CLOCKS_PER_SEC; }

struct Timeline {
  DeformedLattice lattice;
  std::vector<HalmaAssignment> halma;
  std::vector<GlobalRoundPlan> plan;
};

size_t bad_detectors(const Timeline& t, Basis basis, bool stability = false) {
  ExperimentSpec spec;
  spec.lattice = &t.lattice;
  spec.halma = t.halma;
  spec.plan = t.plan;
  spec.memory_basis = basis;
  spec.stability = stability;
  Circuit c = lower(spec);
  auto res = tableau_run(c);
  size_t bad = 0;
  for (const auto& d : res.detectors)
    if (!d.deterministic || d.value) ++bad;
  for (const auto& o : res.observables)
    if (!o.deterministic || o.value) ++bad;
  return bad;
}

Timeline strategy_timeline(int d, std::vector<Coord> defects, int rounds, bool routed_mode) {
  Lattice lat = build_lattice(d);
  DefectSet defs;
  defs.qubits = std::move(defects);
  StrategyResult sr = routed_mode ? baseline_strategy(lat, defs) : superstab_strategy(lat, defs);
  return {sr.lattice, sr.strategy.assignments, xxzz_cycle(sr.strategy.assignments, rounds)};
}

Coord central_bulk_ancilla(const Lattice& lat, Basis basis) {
  Coord best{-1, -1};
  int best_score = 1 << 30;
  for (Coord a : lat.ancilla_qubits()) {
    if (lat.ancilla_basis(a) != basis || lat.neighbors(a).size() != 4) continue;
    int score = std::abs(a.x - lat.d) + std::abs(a.y - lat.d);
    if (score < best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

void criterion_1() {
  clock_t t0 = clock();
  size_t bad = 0, circuits = 0;
  auto check = [&](const Timeline& t, Basis b) {
    bad += bad_detectors(t, b);
    ++circuits;
  };
  for (int d : {3, 5}) {
    Timeline t = strategy_timeline(d, {}, d * 2, true);
    check(t, Basis::Z);
    check(t, Basis::X);
  }
  for (int d : {4, 5, 6}) {
    Coord defect = central_bulk_ancilla(build_lattice(d), Basis::X);
    Timeline t = strategy_timeline(d, {defect}, d * 2, true);
    if (t.halma.size() != 1) ++bad;
    check(t, Basis::Z);
    check(t, Basis::X);
  }
  {  // boundary ancilla defect on d=3
    Timeline t = strategy_timeline(3, {{4, 0}}, 7, true);
    if (t.halma.size() != 1 || !t.halma[0].boundary) ++bad;
    check(t, Basis::Z);
    check(t, Basis::X);
  }
  {  // defect pair: routed check turned gauge by the neighbour's region
    Lattice lat = build_lattice(7);
    Coord x0{6, 6}, zdef{4, 6};
    DefectSet defs;
    defs.qubits = {x0, zdef};
    std::set<Coord> disables;
    for (Coord q : lat.neighbors(zdef)) disables.insert(q);
    std::set<Coord> routed{x0};
    DeformedLattice dl = deform_boundary(lat, defs, true, disables, &routed);
    HalmaAssignment a{x0, Basis::X, Frame{}};
    Timeline t{dl, {a}, xxzz_cycle({a}, 10)};
    check(t, Basis::Z);
    check(t, Basis::X);
  }
  {  // two separated defects on opposite initial orders, interleaved
    Lattice lat = build_lattice(7);
    Coord a{4, 6}, b{10, 8};
    DefectSet defs;
    defs.qubits = {a, b};
    DeformedLattice dl = deform_boundary(lat, defs, true);
    std::vector<HalmaAssignment> halma{{a, Basis::Z, Frame{}},
                                       {b, Basis::Z, *frame_of_order(ZOrder::parse("SWEN"))}};
    Timeline t{dl, halma, xxzz_cycle(halma, 10)};
    check(t, Basis::Z);
    check(t, Basis::X);
  }
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "%zu timelines, %zu nondeterministic detectors, %.1fs", circuits, bad,
                elapsed(t0));
  report(1, bad == 0, detail);
}

void criterion_2() {
  clock_t t0 = clock();
  NoiseBudget b = NoiseBudget::from_p2(1e-3);
  auto spacelike = [&](const Timeline& t) {
    ExperimentSpec spec;
    spec.lattice = &t.lattice;
    spec.halma = t.halma;
    spec.plan = t.plan;
    spec.memory_basis = Basis::Z;
    Circuit noisy = apply_noise(lower(spec), b);
    auto mw = min_weight_logical(extract_dem(noisy), 6);
    return mw.found ? mw.weight : 7;
  };
  Coord defect = central_bulk_ancilla(build_lattice(5), Basis::X);
  int w_free = spacelike(strategy_timeline(5, {}, 10, true));
  int w_routed = spacelike(strategy_timeline(5, {defect}, 10, true));
  int w_super = spacelike(strategy_timeline(5, {defect}, 10, false));
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "defect-free %d (want 5), routed %d (want 5), superstabilizer %d (want 3), %.1fs",
                w_free, w_routed, w_super, elapsed(t0));
  report(2, w_free == 5 && w_routed == 5 && w_super == 3, detail);
}

void criterion_3() {
  clock_t t0 = clock();
  NoiseBudget b = NoiseBudget::from_p2(1e-3);
  auto timelike = [&](const Timeline& t, int cap) {
    ExperimentSpec spec;
    spec.lattice = &t.lattice;
    spec.halma = t.halma;
    spec.plan = t.plan;
    spec.stability = true;
    Circuit noisy = apply_noise(lower(spec), b);
    auto mw = min_weight_logical(extract_dem(noisy), cap);
    return mw.found ? mw.weight : cap + 1;
  };
  Lattice patch = build_stability_patch(4);
  Coord defect = central_bulk_ancilla(patch, Basis::X);
  DefectSet defs;
  defs.qubits = {defect};
  StrategyResult routed = baseline_strategy(patch, defs);
  Timeline troute{routed.lattice, routed.strategy.assignments,
                  xxzz_cycle(routed.strategy.assignments, 12)};
  int w_routed = timelike(troute, 7);
  DefectSet none;
  StrategyResult free_sr = baseline_strategy(patch, none);
  Timeline tfree{free_sr.lattice, {}, xxzz_cycle({}, 12)};
  int w_free = timelike(tfree, 13);
  char detail[160];
  std::snprintf(detail, sizeof detail, "routed timelike %d (want 6), defect-free %d (want 12), %.1fs",
                w_routed, w_free, elapsed(t0));
  report(3, w_routed == 6 && w_free == 12, detail);
}

void criterion_4() {
  clock_t t0 = clock();
  NoiseBudget b = NoiseBudget::from_p2(1e-3);
  int d = 6, rounds = 18;
  size_t shots = 1000000;
  Lattice lat = build_lattice(d);
  Coord defect = central_bulk_ancilla(lat, Basis::X);
  auto rate = [&](const StrategyResult& sr, uint64_t seed) {
    auto z = memory_experiment(sr.lattice, sr.strategy.assignments, rounds, Basis::Z, b, shots, seed);
    auto x = memory_experiment(sr.lattice, sr.strategy.assignments, rounds, Basis::X, b, shots, seed + 1);
    return (z.p_round + x.p_round) / 2;
  };
  DefectSet none;
  DefectSet defs;
  defs.qubits = {defect};
  double r_free = rate(baseline_strategy(lat, none), 1000);
  double r_halma = rate(baseline_strategy(lat, defs), 2000);
  double r_super = rate(superstab_strategy(lat, defs), 3000);
  double halma_ratio = r_halma / r_free;
  double super_ratio = r_super / r_free;
  bool pass = halma_ratio >= 1.1 && halma_ratio <= 2.5 && super_ratio >= 2 * halma_ratio;
  char detail[200];
  std::snprintf(detail, sizeof detail,
                "p_round free %.3g, routed %.3g (ratio %.2f, want 1.1-2.5), superstab %.3g "
                "(ratio %.2f, want >= %.2f), %.0fs",
                r_free, r_halma, halma_ratio, r_super, super_ratio, 2 * halma_ratio, elapsed(t0));
  report(4, pass, detail);
}

void criterion_5() {
  clock_t t0 = clock();
  auto s2 = applicability_stats(11, 0.02, 2500, 77);
  auto s1 = applicability_stats(11, 0.01, 2500, 78);
  bool pass = std::abs(s2.single_order - 0.90) <= 0.04 && std::abs(s2.any_order - 0.99) <= 0.015 &&
              std::abs(s1.single_order - 0.94) <= 0.03 && std::abs(s1.any_order - 0.997) <= 0.005;
  char detail[240];
  std::snprintf(detail, sizeof detail,
                "r=0.02: %.4f (0.90+-0.04) / %.4f (0.99+-0.015); r=0.01: %.4f (0.94+-0.03) / "
                "%.4f (0.997+-0.005); %zu+%zu defects, %.0fs",
                s2.single_order, s2.any_order, s1.single_order, s1.any_order, s2.defects,
                s1.defects, elapsed(t0));
  report(5, pass, detail);
}

std::vector<CellResult> shared_sweep;

void criterion_6() {
  clock_t t0 = clock();
  SweepConfig sc;
  sc.distances = {5, 7, 9};
  sc.rate = 0.02;
  sc.p2s = {1e-3, 3e-3};
  sc.lattices = 50;
  sc.shots = 2000;
  sc.seed = 11;
  shared_sweep = monte_carlo_sweep(sc);
  auto cell = [&](int d, double p2, const std::string& mode) -> const CellResult* {
    for (const auto& r : shared_sweep)
      if (r.d == d && std::abs(r.p2 - p2) < 1e-12 && r.mode == mode) return &r;
    return nullptr;
  };
  bool separated = true;
  std::string msg;
  for (int d : sc.distances) {
    for (double p2 : sc.p2s) {
      const CellResult* h = cell(d, p2, "halma_baseline");
      const CellResult* s = cell(d, p2, "superstabilizer");
      if (!h || !s) { separated = false; continue; }
      // paired comparison on the shared defect sets
      size_t n = std::min(h->per_lattice.size(), s->per_lattice.size());
      double mean = 0, var = 0;
      for (size_t i = 0; i < n; ++i) mean += s->per_lattice[i] - h->per_lattice[i];
      mean /= double(n);
      for (size_t i = 0; i < n; ++i) {
        double e = s->per_lattice[i] - h->per_lattice[i] - mean;
        var += e * e;
      }
      double sem = std::sqrt(var / double(n - 1) / double(n));
      bool ok = mean > 3 * sem;
      separated &= ok;
      char buf[120];
      std::snprintf(buf, sizeof buf, " [d=%d p2=%.0e: %.1f sigma]", d, p2, mean / sem);
      msg += buf;
    }
  }
  const CellResult* h9 = cell(9, 1e-3, "halma_baseline");
  const CellResult* s9 = cell(9, 1e-3, "superstabilizer");
  double ratio9 = h9 && s9 && h9->p_round_mean > 0 ? s9->p_round_mean / h9->p_round_mean : 0;
  bool pass = separated && ratio9 >= 3.0;
  char detail[400];
  std::snprintf(detail, sizeof detail, "all cells separated=%d;%s d=9 ratio %.1f (want >= 3), %.0fs",
                int(separated), msg.c_str(), ratio9, elapsed(t0));
  report(6, pass, detail);
}

void criterion_7() {
  clock_t t0 = clock();
  double p2 = 1e-3;
  std::map<std::string, Footprint> fp;
  bool fits_ok = true;
  for (const std::string& mode :
       {std::string("defect_free"), std::string("halma_postselected"),
        std::string("halma_baseline"), std::string("superstabilizer")}) {
    std::vector<std::pair<int, double>> pts;
    for (const auto& r : shared_sweep)
      if (r.mode == mode && std::abs(r.p2 - p2) < 1e-12) pts.push_back({r.d, r.p_round_mean});
    try {
      FitResult fit = fit_exponential(pts);
      fp[mode] = teraquop_footprint(fit, 1e-12, mode == "defect_free" ? 1 : 2);
    } catch (const std::exception&) {
      fits_ok = false;
    }
  }
  bool pass = false;
  char detail[300];
  if (fits_ok && fp.size() == 4) {
    long f = fp["defect_free"].qubits, ps = fp["halma_postselected"].qubits,
         hb = fp["halma_baseline"].qubits, ss = fp["superstabilizer"].qubits;
    double ss_ratio = double(ss) / double(hb);
    pass = f < ps && ps <= hb && hb < ss && ss_ratio >= 2.0;
    std::snprintf(detail, sizeof detail,
                  "qubits: free %ld <= postselected %ld <= baseline %ld < superstab %ld; "
                  "superstab/baseline %.2f (want >= 2), %.0fs",
                  f, ps, hb, ss, ss_ratio, elapsed(t0));
  } else {
    std::snprintf(detail, sizeof detail, "fit failed or non-decaying rate, %.0fs", elapsed(t0));
  }
  report(7, pass, detail);
}

void criterion_8() {
  clock_t t0 = clock();
  bool ok = true;
  // CXSWAP conjugation table vs composed CNOT and SWAP, all 16 Paulis
  auto swap_pauli = [](PauliPair p) {
    std::swap(p.x1, p.x2);
    std::swap(p.z1, p.z2);
    return p;
  };
  for (int bits = 0; bits < 16; ++bits) {
    PauliPair p{bool(bits & 1), bool(bits & 2), bool(bits & 4), bool(bits & 8)};
    ok &= conjugate(Op::CXSWAP, p) == swap_pauli(conjugate(Op::CNOT, p));
    // reversed gate equals the control/target-reversed table
    ok &= conjugate(Op::SWAPCX, p) == swap_pauli(conjugate(Op::CXSWAP, swap_pauli(p)));
    ok &= conjugate(Op::SWAPCX, p) == conjugate(Op::CNOT, swap_pauli(p));
  }
  // UF corrects all error sets of weight <= (d-1)/2 exhaustively, d <= 5
  auto spacelike_dem = [&](const DeformedLattice& dl, double p) {
    Dem dem;
    std::vector<const Check*> zchecks;
    for (const auto& ch : dl.checks)
      if (ch.basis == Basis::Z) zchecks.push_back(&ch);
    dem.num_dets = zchecks.size();
    dem.num_obs = 1;
    auto logical = logical_support(dl, Basis::Z);
    for (Coord q : dl.enabled_data()) {
      Mechanism m;
      m.p = p;
      for (size_t i = 0; i < zchecks.size(); ++i)
        for (Coord s : zchecks[i]->support)
          if (s == q) m.dets.push_back(uint32_t(i));
      for (Coord s : logical)
        if (s == q) m.obs ^= 1;
      if (!m.dets.empty() || m.obs) dem.mechanisms.push_back(m);
    }
    return dem;
  };
  size_t uf_cases = 0;
  for (int d : {3, 5}) {
    DefectSet none;
    auto sr = baseline_strategy(build_lattice(d), none);
    Dem dem = spacelike_dem(sr.lattice, 1e-2);
    MatchingGraph g = build_graph(dem);
    UfDecoder dec(g);
    int t = (d - 1) / 2;
    std::vector<size_t> idx;
    std::function<void(size_t, size_t)> rec = [&](size_t start, size_t left) {
      if (left == 0 || start == dem.mechanisms.size()) {
        std::vector<uint8_t> synd(g.num_dets, 0);
        uint32_t obs = 0;
        for (size_t i : idx) {
          for (uint32_t dd : dem.mechanisms[i].dets) synd[dd] ^= 1;
          obs ^= dem.mechanisms[i].obs;
        }
        ++uf_cases;
        if (dec.decode(synd) != obs) ok = false;
        return;
      }
      rec(start + 1, left);
      idx.push_back(start);
      rec(start + 1, left - 1);
      idx.pop_back();
    };
    rec(0, size_t(t));
  }
  // UF vs exact ML agreement on sampled d=3 syndromes
  double agreement = 0;
  {
    DefectSet none;
    auto sr = baseline_strategy(build_lattice(3), none);
    Dem dem = spacelike_dem(sr.lattice, 0.08);
    MatchingGraph g = build_graph(dem);
    UfDecoder dec(g);
    size_t agree = 0, total = 2000;
    for (size_t s = 0; s < total; ++s) {
      std::vector<uint8_t> synd(dem.num_dets, 0);
      for (size_t i = 0; i < dem.mechanisms.size(); ++i) {
        uint64_t h = hash_combine(hash_combine(123, s), i);
        if (u01(h) < dem.mechanisms[i].p)
          for (uint32_t dd : dem.mechanisms[i].dets) synd[dd] ^= 1;
      }
      if (dec.decode(synd) == decode_ml(dem, synd)) ++agree;
    }
    agreement = double(agree) / double(total);
    ok &= agreement >= 0.95;
  }
  char detail[200];
  std::snprintf(detail, sizeof detail,
                "conjugation 16/16, UF exhaustive %zu cases, UF-vs-ML agreement %.3f, %.1fs",
                uf_cases, agreement, elapsed(t0));
  report(8, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  criterion_1();
  criterion_2();
  criterion_3();
  if (!quick) criterion_4();
  criterion_5();
  if (!quick) {
    criterion_6();
    criterion_7();
  }
  criterion_8();
  std::printf("acceptance: %d criterion(s) failed%s\n", failures, quick ? " [quick mode]" : "");
  return failures;
}
