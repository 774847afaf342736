#include "dsc/schedule.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dsc {

const char* round_type_name(RoundType t) {
  switch (t) {
    case RoundType::W: return "W";
    case RoundType::V: return "V";
    case RoundType::Lambda: return "Lambda";
    case RoundType::M: return "M";
    case RoundType::III: return "III";
    case RoundType::Regular: return "Regular";
    case RoundType::GaugeX: return "GaugeX";
    case RoundType::GaugeZ: return "GaugeZ";
  }
  throw std::logic_error("bad round type");
}

RoundType round_type_from_name(const std::string& s) {
  for (RoundType t : {RoundType::W, RoundType::V, RoundType::Lambda, RoundType::M, RoundType::III,
                      RoundType::Regular, RoundType::GaugeX, RoundType::GaugeZ})
    if (s == round_type_name(t)) return t;
  throw std::invalid_argument("unknown round type: " + s);
}

bool legal_transition(RoundType prev, RoundType next) {
  switch (prev) {
    case RoundType::W: return next == RoundType::V || next == RoundType::M;
    case RoundType::Lambda: return next == RoundType::M || next == RoundType::V;
    case RoundType::V: return next == RoundType::Lambda;
    case RoundType::M: return next == RoundType::W || next == RoundType::III;
    case RoundType::III: return next == RoundType::III || next == RoundType::W;
    default: return false;
  }
}

BulkGeometry BulkGeometry::make(Coord defect, Basis basis, const Frame& f) {
  Frame eff = f;
  if (basis == Basis::Z) eff.mirror = !eff.mirror;  // mirrored construction
  auto off = [&](Coord o) { return defect + eff.map(o); };
  Coord dn = delta(Dir::N), de = delta(Dir::E), dw = delta(Dir::W), ds = delta(Dir::S);
  BulkGeometry g;
  g.x0 = defect;
  g.n = off(dn);
  g.e = off(de);
  g.w = off(dw);
  g.s = off(ds);
  g.z1 = off(dn + dw);
  g.z2 = off(dn + de);
  g.z3 = off(ds + dw);
  g.z4 = off(ds + de);
  g.z2_n = g.z2 + eff.map(dn);
  g.z2_e = g.z2 + eff.map(de);
  g.z4_e = g.z4 + eff.map(de);
  g.z4_s = g.z4 + eff.map(ds);
  return g;
}

std::vector<Coord> BulkGeometry::footprint() const {
  return {x0, n, e, w, s, z1, z2, z3, z4, z2_n, z2_e, z4_e, z4_s};
}

namespace {

bool is_swapish(Op op) { return op == Op::CXSWAP || op == Op::SWAPCX; }

struct OverlayBuilder {
  RoundOverlay out;
  bool xd;  // defect basis is X

  void gate2(int tick, Op op, Coord a, Coord b) {
    out.ops.push_back({tick, op, a, b, true, false, {}});
  }
  // overlay-ancilla gather (opposite basis of the defect)
  void gather(int tick, Coord data, Coord anc, bool with_swap = false) {
    Op op = with_swap ? Op::CXSWAP : Op::CNOT;
    if (xd) gate2(tick, op, data, anc);
    else gate2(tick, op, anc, data);
  }
  // roving check of the defect basis
  void rover2(int tick, Coord rover, Coord data, bool with_swap = false) {
    Op op = with_swap ? Op::CXSWAP : Op::CNOT;
    if (xd) gate2(tick, op, rover, data);
    else gate2(tick, op, data, rover);
  }
  // pure swap using a freshly reset opposite-basis helper
  void helper_swap(int tick, Coord helper, Coord data) {
    if (xd) gate2(tick, Op::CXSWAP, helper, data);
    else gate2(tick, Op::CXSWAP, data, helper);
  }
  void measure(int tick, Coord at, Coord tag, bool defect_basis_meas, bool crossing_h) {
    Op op;
    if (defect_basis_meas) op = xd ? Op::MRX : Op::MR;
    else op = xd ? Op::MR : Op::MRX;
    out.ops.push_back({tick, op, at, {}, false, true, tag});
    if (crossing_h) out.ops.push_back({tick, Op::H, at, {}, false, false, {}});
  }
};

}  // namespace

RoundOverlay reverse_round(const RoundOverlay& fwd) {
  RoundOverlay out;
  switch (fwd.type) {
    case RoundType::W: out.type = RoundType::M; break;
    case RoundType::M: out.type = RoundType::W; break;
    case RoundType::V: out.type = RoundType::Lambda; break;
    case RoundType::Lambda: out.type = RoundType::V; break;
    default: throw std::invalid_argument("reverse_round expects a W, V, Lambda or M overlay");
  }
  out.suppressed = fwd.suppressed;
  auto rev_tick = [](int t) { return t == -1 ? 4 : t == 4 ? -1 : 3 - t; };
  std::vector<OverlayOp> gates;
  for (const auto& op : fwd.ops) {
    if (op.op == Op::H) continue;
    if (is_measurement(op.op)) continue;
    OverlayOp g = op;
    g.tick = rev_tick(op.tick);
    if (op.op == Op::CXSWAP) g.op = Op::SWAPCX;
    else if (op.op == Op::SWAPCX) g.op = Op::CXSWAP;
    gates.push_back(g);
  }
  std::stable_sort(gates.begin(), gates.end(),
                   [](const OverlayOp& a, const OverlayOp& b) { return a.tick < b.tick; });
  out.ops = gates;
  for (const auto& op : fwd.ops) {
    if (!is_measurement(op.op)) continue;
    Coord pos = op.a;
    for (const auto& g : gates) {
      if (!is_swapish(g.op)) continue;
      if (g.a == pos) pos = g.b;
      else if (g.b == pos) pos = g.a;
    }
    bool busy4 = false;
    for (const auto& g : gates)
      if (g.tick == 4 && (g.a == pos || g.b == pos)) busy4 = true;
    OverlayOp m = op;
    m.a = pos;
    m.tick = busy4 ? 5 : 4;
    out.ops.push_back(m);
  }
  return out;
}

RoundOverlay halma_overlay(const DeformedLattice& dl, const HalmaAssignment& a,
                           RoundType type, bool staged_entry, RoundType next) {
  OverlayBuilder b;
  b.xd = a.basis == Basis::X;
  b.out.type = type;

  if (a.boundary) {
    b.out.suppressed.insert(a.defect);
    if (type == RoundType::III || type == RoundType::M || type == RoundType::W) {
      if (type == RoundType::W && next == RoundType::V)
        b.out.ops.push_back({4, Op::H, a.partner, {}, false, false, {}});
      return b.out;
    }
    // V or Lambda: the partner ancilla borrows the weight-2 check.
    b.out.suppressed.insert(a.partner);
    const Lattice& lat = dl.base;
    std::vector<Coord> data;
    for (Coord q : lat.neighbors(a.defect))
      if (dl.data_enabled(q)) data.push_back(q);
    if (data.empty()) throw std::runtime_error("boundary defect has no live support");
    ZOrder v_order = order_of_frame(a.frame).reversed();
    // tick availability at the V order; the Lambda round uses mirrored ticks
    auto busy = [&](Coord q, int t) {
      for (Coord anc : lat.neighbors(q)) {
        if (!dl.ancilla_alive(anc) || dl.halma_virtual.count(anc)) continue;
        if (anc == a.partner || anc == a.defect) continue;
        ZOrder o = lat.ancilla_basis(anc) == Basis::Z ? v_order : x_order_from_z_order(v_order);
        if (anc + delta(o.seq[t]) == q) return true;
      }
      return false;
    };
    std::vector<int> ticks;
    for (Coord q : data) {
      int found = -1;
      for (int t = 0; t < 4 && found < 0; ++t) {
        if (busy(q, t)) continue;
        if (std::find(ticks.begin(), ticks.end(), t) != ticks.end()) continue;
        found = t;
      }
      if (found < 0) throw std::runtime_error("no free tick for borrowed boundary check");
      ticks.push_back(found);
    }
    RoundOverlay v;
    v.type = RoundType::V;
    v.suppressed = b.out.suppressed;
    OverlayBuilder vb;
    vb.xd = b.xd;
    vb.out = v;
    for (size_t i = 0; i < data.size(); ++i) vb.rover2(ticks[i], a.partner, data[i]);
    vb.measure(4, a.partner, a.defect, true, false);
    if (type == RoundType::V) return vb.out;
    RoundOverlay lam = reverse_round(vb.out);
    if (next == RoundType::M || next == RoundType::III || next == RoundType::W)
      lam.ops.push_back({4, Op::H, a.partner, {}, false, false, {}});
    return lam;
  }

  BulkGeometry g = BulkGeometry::make(a.defect, a.basis, a.frame);
  bool s_alive = dl.data_enabled(g.s);
  bool w_alive = dl.data_enabled(g.w);
  if (!dl.data_enabled(g.e) || !dl.data_enabled(g.n))
    throw std::runtime_error("routed handling needs the staging-path data qubits");
  for (Coord anc : {g.z1, g.z2, g.z4})
    if (!dl.base.is_ancilla(anc) || !dl.ancilla_alive(anc) || dl.halma_virtual.count(anc))
      throw std::runtime_error("routed handling needs its neighbour ancillas");

  auto build_w = [&]() {
    OverlayBuilder wb;
    wb.xd = b.xd;
    wb.out.type = RoundType::W;
    wb.out.suppressed = {g.x0, g.z2};
    if (dl.data_enabled(g.z2_n)) wb.gather(0, g.z2_n, g.z2);
    if (dl.data_enabled(g.z2_e)) wb.gather(1, g.z2_e, g.z2);
    wb.gather(2, g.n, g.z2);
    wb.gather(3, g.e, g.z2, /*with_swap=*/true);
    wb.measure(4, g.e, g.z2, false, /*crossing_h=*/true);
    if (s_alive) {
      wb.out.suppressed.insert(g.z4);
      wb.gather(0, g.e, g.z4);
      if (dl.data_enabled(g.z4_e)) wb.gather(1, g.z4_e, g.z4);
      if (dl.data_enabled(g.z4_s)) wb.gather(3, g.z4_s, g.z4);
      wb.gather(4, g.s, g.z4, /*with_swap=*/true);
      wb.measure(5, g.s, g.z4, false, false);
    }
    return wb.out;
  };

  auto build_v = [&]() {
    OverlayBuilder vb;
    vb.xd = b.xd;
    vb.out.type = RoundType::V;
    vb.out.suppressed = {g.x0, g.z1, g.z2, g.z4};
    if (dl.base.is_ancilla(g.z3)) vb.out.suppressed.insert(g.z3);
    if (s_alive) {
      vb.rover2(0, g.e, g.z4);            // support qubit staged at z4's home
      vb.helper_swap(1, g.s, g.z4);       // returner swaps it back home
    }
    vb.rover2(1, g.e, g.z2, /*with_swap=*/true);
    vb.rover2(2, g.z2, g.n, /*with_swap=*/true);
    if (w_alive) {
      vb.helper_swap(2, g.z1, g.w);       // stager parks w at z1's home
      vb.rover2(3, g.n, g.z1);
    }
    vb.measure(4, g.n, g.x0, true, false);
    return vb.out;
  };

  switch (type) {
    case RoundType::III:
      b.out.suppressed.insert(g.x0);
      return b.out;
    case RoundType::W:
      if (staged_entry) throw std::runtime_error("W round needs the regular configuration");
      if (next != RoundType::V) {  // nothing to stage for
        b.out.type = RoundType::W;
        b.out.suppressed.insert(g.x0);
        return b.out;
      }
      return build_w();
    case RoundType::V:
      if (!staged_entry) throw std::runtime_error("V round needs the staged configuration");
      return build_v();
    case RoundType::Lambda: {
      RoundOverlay lam = reverse_round(build_v());
      if (next == RoundType::M) {
        for (auto& op : lam.ops)
          if (is_measurement(op.op) && op.tick == 4)
            lam.ops.push_back({4, Op::H, op.a, {}, false, false, {}});
      }
      return lam;
    }
    case RoundType::M: {
      if (!staged_entry) {
        b.out.type = RoundType::M;
        b.out.suppressed.insert(g.x0);
        return b.out;
      }
      return reverse_round(build_w());
    }
    default:
      throw std::invalid_argument("not a defect round type");
  }
}

RoundOverlay w_round(const DeformedLattice& dl, const HalmaAssignment& a, const ZOrder& z) {
  if (order_of_frame(a.frame) != z)
    throw std::invalid_argument("W round order must match the defect frame");
  return halma_overlay(dl, a, RoundType::W, false, RoundType::V);
}

RoundOverlay v_round(const DeformedLattice& dl, const HalmaAssignment& a, const ZOrder& z,
                     RoundType prev) {
  if (prev != RoundType::W && prev != RoundType::Lambda)
    throw std::invalid_argument("V round must follow a W or Lambda round");
  if (order_of_frame(a.frame).reversed() != z)
    throw std::invalid_argument("V round order must be the reverse of the defect frame");
  return halma_overlay(dl, a, RoundType::V, true, RoundType::Lambda);
}

RoundOverlay boundary_v_round(const DeformedLattice& dl, const HalmaAssignment& a, const ZOrder& z) {
  if (!a.boundary) throw std::invalid_argument("not a boundary assignment");
  if (dl.defects.is_defective(a.partner))
    throw std::runtime_error("partner ancilla of a boundary defect is defective");
  if (order_of_frame(a.frame).reversed() != z)
    throw std::invalid_argument("V round order must be the reverse of the defect frame");
  return halma_overlay(dl, a, RoundType::V, true, RoundType::Lambda);
}

std::vector<RoundType> defect_round_stream(int rounds, int v_phase) {
  using RT = RoundType;
  std::vector<RT> s(rounds, RT::III);
  if (rounds < 1) return s;
  s[0] = RT::W;
  const RT cyc[4] = {RT::V, RT::Lambda, RT::M, RT::W};
  for (int r = 1; r < rounds; ++r) {
    int pos = ((r - v_phase) % 4 + 4) % 4;
    s[r] = cyc[pos];
  }
  for (int r = 1; r < rounds && r < v_phase; ++r)
    if (s[r] == RT::V || s[r] == RT::Lambda) s[r] = RT::III;
  // the final configuration must be regular
  int n = rounds;
  if (s[n - 1] == RT::Lambda) {
    s[n - 1] = RT::III;
    if (n >= 2 && s[n - 2] == RT::V) s[n - 2] = RT::III;
    if (n >= 3 && s[n - 3] == RT::W) s[n - 3] = RT::III;
  } else if (s[n - 1] == RT::V) {
    s[n - 1] = RT::III;
    if (n >= 2 && s[n - 2] == RT::W) s[n - 2] = RT::III;
  }
  // normalise filler labels into a legal chain
  for (int guard = 0; guard < 4 * rounds + 4; ++guard) {
    bool changed = false;
    for (int r = 1; r < rounds; ++r) {
      if (legal_transition(s[r - 1], s[r])) continue;
      if (s[r - 1] == RT::W && (s[r] == RT::III || s[r] == RT::W)) { s[r - 1] = RT::III; changed = true; }
      else if (s[r - 1] == RT::III && s[r] == RT::M) { s[r] = RT::III; changed = true; }
      else if (s[r - 1] == RT::M && s[r] == RT::M) { s[r] = RT::III; changed = true; }
      else throw std::logic_error("round stream normalisation failed");
    }
    if (!changed) break;
  }
  for (int r = 1; r < rounds; ++r) assert(legal_transition(s[r - 1], s[r]));
  return s;
}

namespace {

int phase_of(const HalmaAssignment& a, const ZOrder& even_order) {
  bool side0 = order_of_frame(a.frame) == even_order;
  if (a.basis == Basis::X) return side0 ? 1 : 2;
  return side0 ? 3 : 4;
}

}  // namespace

std::vector<GlobalRoundPlan> xxzz_cycle(const std::vector<HalmaAssignment>& defects, int rounds) {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  bool has_b = false;
  for (const auto& a : defects) has_b |= a.alternation_group;

  std::vector<GlobalRoundPlan> plan(rounds);
  if (!has_b) {
    ZOrder even = ZOrder::news();
    // all defect frames must share one order pair {even, reverse(even)}
    for (const auto& a : defects) {
      ZOrder o = order_of_frame(a.frame);
      if (o == ZOrder::news() || o == ZOrder::news().reversed()) continue;
      even = std::min(o.str(), o.reversed().str()) == o.str() ? o : o.reversed();
    }
    for (const auto& a : defects) {
      ZOrder o = order_of_frame(a.frame);
      if (!(o == even || o == even.reversed()))
        throw std::runtime_error("defect frames need incompatible global orders");
    }
    for (int r = 0; r < rounds; ++r) {
      plan[r].index = r;
      plan[r].z = r % 2 == 0 ? even : even.reversed();
      plan[r].basis = r == 0 ? BasisLabel::Init
                             : (((r - 1) / 2) % 2 == 0 ? BasisLabel::XRound : BasisLabel::ZRound);
    }
    for (const auto& a : defects) {
      auto stream = defect_round_stream(rounds, phase_of(a, even));
      for (int r = 0; r < rounds; ++r) plan[r].per_defect[a.defect] = stream[r];
    }
    return plan;
  }

  // Alternation: group A cycles and group B cycles with one reconfiguration
  // buffer round between them.
  ZOrder even_a = ZOrder::news(), even_b = ZOrder::news();
  for (const auto& a : defects) {
    ZOrder o = order_of_frame(a.frame);
    ZOrder rep = std::min(o.str(), o.reversed().str()) == o.str() ? o : o.reversed();
    (a.alternation_group ? even_b : even_a) = rep;
  }
  std::vector<std::map<Coord, RoundType>> types(rounds);
  std::vector<ZOrder> orders(rounds, even_a);
  int r = 0;
  bool group_b = false;
  while (r < rounds) {
    ZOrder even = group_b ? even_b : even_a;
    int take = std::min(4, rounds - r);
    for (int i = 0; i < take; ++i) {
      orders[r + i] = i % 2 == 0 ? even : even.reversed();
      for (const auto& a : defects) {
        bool active = a.alternation_group == group_b;
        RoundType t = RoundType::III;
        if (active && take == 4) t = std::array<RoundType, 4>{RoundType::W, RoundType::V,
                                                              RoundType::Lambda, RoundType::M}[i];
        types[r + i][a.defect] = t;
      }
    }
    r += take;
    if (r < rounds) {  // buffer
      orders[r] = group_b ? even_a : even_b;
      for (const auto& a : defects) types[r][a.defect] = RoundType::III;
      ++r;
    }
    group_b = !group_b;
  }
  for (int i = 0; i < rounds; ++i) {
    plan[i].index = i;
    plan[i].z = orders[i];
    plan[i].basis = i == 0 ? BasisLabel::Init
                           : (((i - 1) / 2) % 2 == 0 ? BasisLabel::XRound : BasisLabel::ZRound);
    plan[i].per_defect = types[i];
  }
  // fix truncated tails
  for (const auto& a : defects) {
    std::vector<RoundType> s(rounds);
    for (int i = 0; i < rounds; ++i) s[i] = plan[i].per_defect[a.defect];
    if (rounds >= 1 && s[rounds - 1] == RoundType::V) {
      s[rounds - 1] = RoundType::III;
      if (rounds >= 2 && s[rounds - 2] == RoundType::W) s[rounds - 2] = RoundType::III;
    }
    if (rounds >= 1 && s[rounds - 1] == RoundType::Lambda) {
      s[rounds - 1] = RoundType::III;
      if (rounds >= 2) s[rounds - 2] = RoundType::III;
      if (rounds >= 3) s[rounds - 3] = RoundType::III;
    }
    if (rounds >= 1 && s[rounds - 1] == RoundType::W) s[rounds - 1] = RoundType::III;
    for (int i = 0; i < rounds; ++i) plan[i].per_defect[a.defect] = s[i];
  }
  return plan;
}

std::string plan_json(const std::vector<GlobalRoundPlan>& plan) {
  nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
  for (const auto& p : plan) {
    nlohmann::ordered_json r;
    r["i"] = p.index;
    r["basis"] = p.basis == BasisLabel::Init ? "init" : (p.basis == BasisLabel::XRound ? "X" : "Z");
    r["z_order"] = p.z.str();
    nlohmann::ordered_json defs = nlohmann::ordered_json::object();
    for (const auto& [c, t] : p.per_defect) defs[c.str()] = round_type_name(t);
    r["defects"] = defs;
    rounds.push_back(r);
  }
  nlohmann::ordered_json j;
  j["rounds"] = rounds;
  return j.dump(2) + "\n";
}

std::vector<GlobalRoundPlan> plan_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::vector<GlobalRoundPlan> plan;
  for (const auto& r : j.at("rounds")) {
    GlobalRoundPlan p;
    p.index = r.at("i").get<int>();
    std::string b = r.at("basis").get<std::string>();
    p.basis = b == "init" ? BasisLabel::Init : (b == "X" ? BasisLabel::XRound : BasisLabel::ZRound);
    p.z = ZOrder::parse(r.at("z_order").get<std::string>());
    for (const auto& [key, val] : r.at("defects").items()) {
      size_t comma = key.find(',');
      Coord c{std::stoi(key.substr(1, comma - 1)),
              std::stoi(key.substr(comma + 1, key.size() - comma - 2))};
      p.per_defect[c] = round_type_from_name(val.get<std::string>());
    }
    plan.push_back(p);
  }
  return plan;
}

void check_no_routing_overlap(const DeformedLattice& dl,
                              const std::vector<HalmaAssignment>& defects,
                              const std::vector<GlobalRoundPlan>& plan) {
  for (const auto& p : plan) {
    std::map<Coord, Coord> claimed;  // qubit -> defect that uses it
    for (const auto& a : defects) {
      auto it = p.per_defect.find(a.defect);
      if (it == p.per_defect.end() || it->second == RoundType::III) continue;
      std::vector<Coord> fp;
      if (a.boundary) {
        fp = {a.defect, a.partner};
        for (Coord q : dl.base.neighbors(a.defect)) fp.push_back(q);
      } else {
        fp = BulkGeometry::make(a.defect, a.basis, a.frame).footprint();
      }
      for (Coord q : fp) {
        auto [pos, fresh] = claimed.try_emplace(q, a.defect);
        if (!fresh && pos->second != a.defect)
          throw std::runtime_error("routing overlap between defects at " + pos->second.str() +
                                   " and " + a.defect.str() + " in round " +
                                   std::to_string(p.index));
      }
    }
  }
}

}  // namespace dsc
