#include "dsc/compile.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <stdexcept>

#include "dsc/util.hpp"

namespace dsc {

namespace {

struct MeasEvent {
  int round;
  int rec;
};

struct PendingOp {
  OverlayOp op;
};

struct TickBucket {
  std::vector<std::array<uint32_t, 2>> cnot, cxswap, swapcx;
  std::vector<std::pair<uint32_t, Coord>> mr, mrx;  // qubit id, tag home
  std::vector<uint32_t> hs;
};

struct CheckMeta {
  Basis basis;
  int region = -1;
  std::vector<Coord> support;
};

}  // namespace

std::vector<Coord> logical_support(const DeformedLattice& dl, Basis basis,
                                   const std::vector<ExtraCheck>& extra) {
  std::vector<Coord> data = dl.enabled_data();
  if (data.empty()) throw std::runtime_error("degenerate patch: no enabled data");
  std::map<Coord, int> col;
  for (size_t i = 0; i < data.size(); ++i) col[data[i]] = int(i);
  size_t n = data.size();
  Basis other = opposite(basis);

  auto row_of = [&](const std::vector<Coord>& supp) {
    BitRow r(n);
    for (Coord q : supp) r.set(size_t(col.at(q)));
    return r;
  };

  // commute with every check of the opposite basis (gauges included)
  std::vector<BitRow> a_rows;
  for (const auto& ch : dl.checks)
    if (ch.basis == other) a_rows.push_back(row_of(ch.support));
  for (const auto& ch : extra)
    if (ch.basis == other) a_rows.push_back(row_of(ch.support));

  // stabilizer group of `basis`: full checks plus superstabilizer products
  std::vector<BitRow> stab_rows;
  for (const auto& ch : dl.checks)
    if (ch.basis == basis && !ch.is_gauge()) stab_rows.push_back(row_of(ch.support));
  for (const auto& ch : extra)
    if (ch.basis == basis) stab_rows.push_back(row_of(ch.support));
  for (const auto& reg : dl.regions) {
    const auto& merged = basis == Basis::X ? reg.merged_support_x : reg.merged_support_z;
    if (!merged.empty()) stab_rows.push_back(row_of(merged));
  }

  // null space of the opposite-basis check matrix
  std::vector<BitRow> mat = a_rows;
  std::vector<int> pivot_col;
  size_t rank = 0;
  for (size_t c = 0; c < n && rank < mat.size(); ++c) {
    size_t p = rank;
    while (p < mat.size() && !mat[p].get(c)) ++p;
    if (p == mat.size()) continue;
    std::swap(mat[rank], mat[p]);
    for (size_t i = 0; i < mat.size(); ++i)
      if (i != rank && mat[i].get(c)) mat[i] ^= mat[rank];
    pivot_col.push_back(int(c));
    ++rank;
  }
  std::set<int> pivots(pivot_col.begin(), pivot_col.end());

  // reduce candidates against the stabilizer span to test independence
  std::vector<BitRow> span = stab_rows;
  std::vector<int> span_pivots;
  {
    size_t r = 0;
    for (size_t c = 0; c < n && r < span.size(); ++c) {
      size_t p = r;
      while (p < span.size() && !span[p].get(c)) ++p;
      if (p == span.size()) continue;
      std::swap(span[r], span[p]);
      for (size_t i = 0; i < span.size(); ++i)
        if (i != r && span[i].get(c)) span[i] ^= span[r];
      span_pivots.push_back(int(c));
      ++r;
    }
    span.resize(r);
  }
  auto reduce = [&](BitRow v) {
    for (size_t i = 0; i < span.size(); ++i)
      if (v.get(size_t(span_pivots[i]))) v ^= span[i];
    return v;
  };

  for (size_t free_c = 0; free_c < n; ++free_c) {
    if (pivots.count(int(free_c))) continue;
    BitRow v(n);
    v.set(free_c);
    // back-substitute pivots so that A v = 0
    for (size_t i = 0; i < rank; ++i)
      if (mat[i].get(free_c)) v.set(size_t(pivot_col[i]));
    if (!reduce(v).any()) continue;  // inside the stabilizer span
    // greedy weight reduction against the stabilizer generators
    bool improved = true;
    while (improved) {
      improved = false;
      for (const auto& s : stab_rows) {
        BitRow w = v;
        w ^= s;
        if (w.popcount() < v.popcount() && reduce(w).any()) {
          v = w;
          improved = true;
        }
      }
    }
    std::vector<Coord> out;
    for (size_t i = 0; i < n; ++i)
      if (v.get(i)) out.push_back(data[i]);
    return out;
  }
  throw std::runtime_error("degenerate patch: no intact logical operator");
}

Circuit lower(const ExperimentSpec& spec) {
  const DeformedLattice& dl = *spec.lattice;
  const Lattice& lat = dl.base;
  const auto& plan = spec.plan;
  if (plan.empty()) throw std::invalid_argument("plan has no rounds");

  // physical qubits: enabled data plus ancillas carrying a check (virtual
  // boundary homes have no physical qubit)
  std::map<Coord, uint32_t> ids;
  std::map<Coord, CheckMeta> metas;
  for (const auto& ch : dl.checks) metas[ch.home] = {ch.basis, ch.region, ch.support};
  {
    uint32_t next = 0;
    for (const auto& [c, role] : lat.qubits) {
      bool keep = false;
      if (role == Role::Data) keep = dl.data_enabled(c);
      else keep = metas.count(c) && !dl.halma_virtual.count(c);
      if (keep) ids[c] = next++;
    }
  }
  auto id_of = [&](Coord c) {
    auto it = ids.find(c);
    if (it == ids.end()) throw std::logic_error("op touches an unused qubit at " + c.str());
    return it->second;
  };

  // pseudo-checks for routed defective ancillas (their stabilizer is
  // measured by the rover but the ancilla itself is dead)
  for (const auto& a : spec.halma) {
    if (metas.count(a.defect)) continue;
    CheckMeta m;
    m.basis = lat.ancilla_basis(a.defect);
    for (Coord q : lat.neighbors(a.defect))
      if (dl.data_enabled(q)) m.support.push_back(q);
    for (Coord q : lat.neighbors(a.defect)) {
      if (dl.data_enabled(q) || !lat.is_data(q)) continue;
      for (const auto& reg : dl.regions)
        if (std::find(reg.dead_data.begin(), reg.dead_data.end(), q) != reg.dead_data.end())
          m.region = reg.id;
    }
    metas[a.defect] = m;
  }

  // precompute overlays per round with the staging state machine
  int rounds = int(plan.size());
  std::vector<std::vector<RoundOverlay>> overlays(rounds);
  for (const auto& a : spec.halma) {
    bool staged = false;
    for (int r = 0; r < rounds; ++r) {
      auto it = plan[r].per_defect.find(a.defect);
      RoundType t = it == plan[r].per_defect.end() ? RoundType::III : it->second;
      RoundType next = RoundType::III;
      if (r + 1 < rounds) {
        auto nx = plan[r + 1].per_defect.find(a.defect);
        next = nx == plan[r + 1].per_defect.end() ? RoundType::III : nx->second;
      }
      overlays[r].push_back(halma_overlay(dl, a, t, staged, next));
      switch (t) {
        case RoundType::W:
          staged = !a.boundary && next == RoundType::V;
          break;
        case RoundType::V:
        case RoundType::Lambda:
          staged = !a.boundary;
          break;
        case RoundType::M:
        case RoundType::III:
          staged = false;
          break;
        default:
          break;
      }
    }
  }

  Circuit c;
  for (const auto& [coord, q] : ids) c.coords[q] = coord;

  std::map<Coord, std::vector<MeasEvent>> events;
  int rec_count = 0;

  // initialization
  {
    std::vector<uint32_t> rz, rx;
    for (const auto& [coord, q] : ids) {
      if (lat.is_data(coord)) (spec.memory_basis == Basis::X && !spec.stability ? rx : rz).push_back(q);
      else (metas.at(coord).basis == Basis::X ? rx : rz).push_back(q);
    }
    if (!rz.empty()) c.append({Op::R, rz, {}, {}});
    if (!rx.empty()) c.append({Op::RX, rx, {}, {}});
    c.tick();
  }

  std::vector<OverlayOp> carry;  // absorbed measurements from the prior round
  for (int r = 0; r < rounds; ++r) {
    const auto& p = plan[r];
    std::array<TickBucket, 5> ticks;

    std::set<Coord> suppressed;
    for (const auto& ov : overlays[r])
      for (Coord s : ov.suppressed) suppressed.insert(s);

    // regular programs
    Basis gauge_basis = p.basis == BasisLabel::Init
                            ? (spec.stability ? Basis::Z : spec.memory_basis)
                            : (p.basis == BasisLabel::XRound ? Basis::X : Basis::Z);
    for (const auto& ch : dl.checks) {
      if (suppressed.count(ch.home) || dl.halma_virtual.count(ch.home)) continue;
      if (ch.is_gauge() && ch.basis != gauge_basis) continue;
      ZOrder zo = ch.basis == Basis::Z ? p.z : x_order_from_z_order(p.z);
      for (int t = 0; t < 4; ++t) {
        Coord q = ch.home + delta(zo.seq[t]);
        if (!dl.data_enabled(q)) continue;
        if (ch.basis == Basis::Z) ticks[t].cnot.push_back({id_of(q), id_of(ch.home)});
        else ticks[t].cnot.push_back({id_of(ch.home), id_of(q)});
      }
      if (ch.basis == Basis::Z) ticks[4].mr.push_back({id_of(ch.home), ch.home});
      else ticks[4].mrx.push_back({id_of(ch.home), ch.home});
    }

    // carried-in measurements land in the first tick
    for (const auto& op : carry) {
      if (op.op == Op::MR) ticks[0].mr.push_back({id_of(op.a), op.tag});
      else ticks[0].mrx.push_back({id_of(op.a), op.tag});
    }
    carry.clear();

    // overlay operations
    auto place = [&](const OverlayOp& op, int tick) {
      TickBucket& b = ticks[tick];
      switch (op.op) {
        case Op::CNOT: b.cnot.push_back({id_of(op.a), id_of(op.b)}); break;
        case Op::CXSWAP: b.cxswap.push_back({id_of(op.a), id_of(op.b)}); break;
        case Op::SWAPCX: b.swapcx.push_back({id_of(op.a), id_of(op.b)}); break;
        case Op::MR: b.mr.push_back({id_of(op.a), op.tag}); break;
        case Op::MRX: b.mrx.push_back({id_of(op.a), op.tag}); break;
        case Op::H: b.hs.push_back(id_of(op.a)); break;
        default: throw std::logic_error("bad overlay op");
      }
    };
    for (const auto& ov : overlays[r])
      for (const auto& op : ov.ops) {
        if (op.tick >= 0 && op.tick <= 4) place(op, op.tick);
        else if (op.tick == 5) carry.push_back({op});
        // tick -1 ops were emitted by the previous round
      }
    if (r + 1 < rounds)
      for (const auto& ov : overlays[r + 1])
        for (const auto& op : ov.ops)
          if (op.tick == -1) place(op, 4);
    if (r + 1 == rounds && !carry.empty())
      throw std::logic_error("absorbed measurement after the final round");

    // emit ticks
    for (int t = 0; t < 5; ++t) {
      TickBucket& b = ticks[t];
      std::set<uint32_t> claimed, measured;
      auto claim = [&](uint32_t q) {
        if (!claimed.insert(q).second)
          throw std::logic_error("tick collision in round " + std::to_string(r) + " tick " +
                                 std::to_string(t) + " qubit " + std::to_string(q));
      };
      auto flat = [&](std::vector<std::array<uint32_t, 2>>& v, Op op) {
        if (v.empty()) return;
        std::sort(v.begin(), v.end());
        Instruction ins{op, {}, {}, {}};
        for (auto& pr : v) {
          claim(pr[0]);
          claim(pr[1]);
          ins.qubits.push_back(pr[0]);
          ins.qubits.push_back(pr[1]);
        }
        c.append(std::move(ins));
      };
      flat(b.cnot, Op::CNOT);
      flat(b.cxswap, Op::CXSWAP);
      flat(b.swapcx, Op::SWAPCX);
      auto meas = [&](std::vector<std::pair<uint32_t, Coord>>& v, Op op) {
        if (v.empty()) return;
        std::sort(v.begin(), v.end());
        Instruction ins{op, {}, {}, {}};
        for (auto& [q, tag] : v) {
          claim(q);
          measured.insert(q);
          ins.qubits.push_back(q);
          events[tag].push_back({r, rec_count++});
        }
        c.append(std::move(ins));
      };
      meas(b.mr, Op::MR);
      meas(b.mrx, Op::MRX);
      if (!b.hs.empty()) {
        std::sort(b.hs.begin(), b.hs.end());
        for (uint32_t q : b.hs)
          if (!measured.count(q)) claim(q);
        c.append({Op::H, b.hs, {}, {}});
      }
      c.tick();
    }
  }

  // final data measurement
  std::map<Coord, int> final_rec;
  {
    std::vector<uint32_t> qs;
    std::map<uint32_t, Coord> rev;
    for (const auto& [coord, q] : ids)
      if (lat.is_data(coord)) {
        qs.push_back(q);
        rev[q] = coord;
      }
    std::sort(qs.begin(), qs.end());
    Instruction ins{spec.memory_basis == Basis::X && !spec.stability ? Op::MRX : Op::MR, qs, {}, {}};
    for (uint32_t q : qs) final_rec[rev[q]] = rec_count++;
    c.append(std::move(ins));
  }

  // ---- detector wiring ----
  Basis mem = spec.stability ? Basis::Z : spec.memory_basis;

  // rounds in which each region measured gauges of each basis
  std::map<int, std::array<std::set<int>, 2>> region_rounds;  // region -> {X rounds, Z rounds}
  std::map<int, std::array<std::vector<Coord>, 2>> region_homes;
  for (const auto& [home, meta] : metas) {
    if (meta.region < 0) continue;
    region_homes[meta.region][meta.basis == Basis::X ? 0 : 1].push_back(home);
    for (const auto& e : events[home])
      region_rounds[meta.region][meta.basis == Basis::X ? 0 : 1].insert(e.round);
  }
  auto opposite_between = [&](const CheckMeta& meta, int r1, int r2) {
    if (meta.region < 0) return false;
    const auto& rs = region_rounds[meta.region][meta.basis == Basis::X ? 1 : 0];
    auto it = rs.upper_bound(r1);
    return it != rs.end() && *it < r2;
  };

  struct Det {
    std::vector<int> recs;
    Coord at;
    int round;
  };
  std::vector<Det> dets;

  for (const auto& [home, meta] : metas) {
    const auto& evs = events[home];
    if (evs.empty()) continue;
    if (meta.basis == mem && !opposite_between(meta, -1, evs[0].round))
      dets.push_back({{evs[0].rec}, home, evs[0].round});
    for (size_t i = 1; i < evs.size(); ++i)
      if (!opposite_between(meta, evs[i - 1].round, evs[i].round))
        dets.push_back({{evs[i - 1].rec, evs[i].rec}, home, evs[i].round});
    if (meta.basis == mem && !opposite_between(meta, evs.back().round, rounds + 1)) {
      Det d{{evs.back().rec}, home, rounds};
      for (Coord q : meta.support) d.recs.push_back(final_rec.at(q));
      dets.push_back(d);
    }
  }

  // superstabilizer products across opposite-basis interruptions
  for (const auto& [region, homes2] : region_homes) {
    for (int bi = 0; bi < 2; ++bi) {
      Basis b = bi == 0 ? Basis::X : Basis::Z;
      const auto& homes = homes2[bi];
      if (homes.empty()) continue;
      const auto& own = region_rounds[region][bi];
      const auto& other = region_rounds[region][1 - bi];
      // product-complete rounds: every gauge of this basis measured
      std::vector<int> complete;
      for (int r : own) {
        bool all = true;
        for (Coord h : homes) {
          bool found = false;
          for (const auto& e : events[h]) found |= e.round == r;
          all &= found;
        }
        if (all) complete.push_back(r);
      }
      auto recs_at = [&](int r) {
        std::vector<int> out;
        for (Coord h : homes)
          for (const auto& e : events[h])
            if (e.round == r) out.push_back(e.rec);
        return out;
      };
      auto interrupted = [&](int r1, int r2) {
        auto it = other.upper_bound(r1);
        return it != other.end() && *it < r2;
      };
      for (size_t i = 1; i < complete.size(); ++i) {
        if (!interrupted(complete[i - 1], complete[i])) continue;
        Det d{recs_at(complete[i - 1]), homes[0], complete[i]};
        for (int rec : recs_at(complete[i])) d.recs.push_back(rec);
        dets.push_back(d);
      }
      if (b == mem && !complete.empty() && interrupted(complete.back(), rounds + 1)) {
        std::vector<Coord> merged;
        for (Coord h : homes) merged = xor_sorted(merged, metas.at(h).support);
        Det d{recs_at(complete.back()), homes[0], rounds};
        for (Coord q : merged) d.recs.push_back(final_rec.at(q));
        dets.push_back(d);
      }
    }
  }

  std::sort(dets.begin(), dets.end(), [](const Det& a, const Det& b) {
    if (a.round != b.round) return a.round < b.round;
    if (a.at != b.at) return a.at < b.at;
    return a.recs < b.recs;
  });
  for (const auto& d : dets) {
    Instruction ins{Op::Detector, {}, {}, {double(d.at.x), double(d.at.y), double(d.round)}};
    std::vector<int> recs = d.recs;
    std::sort(recs.begin(), recs.end());
    recs.erase(std::unique(recs.begin(), recs.end()), recs.end());
    for (int rec : recs) ins.rec.push_back(int32_t(rec) - int32_t(rec_count));
    c.append(std::move(ins));
  }

  if (spec.stability) {
    Instruction ins{Op::ObservableInclude, {}, {}, {0.0}};
    std::vector<int> recs;
    for (const auto& [home, meta] : metas) {
      if (meta.basis != Basis::X) continue;
      const auto& evs = events[home];
      if (evs.empty()) throw std::runtime_error("stability patch has an unmeasured X check");
      recs.push_back(evs.back().rec);
    }
    std::sort(recs.begin(), recs.end());
    for (int rec : recs) ins.rec.push_back(int32_t(rec) - int32_t(rec_count));
    c.append(std::move(ins));
  } else {
    std::vector<ExtraCheck> extra;
    for (const auto& a : spec.halma) {
      if (dl.checks.end() !=
          std::find_if(dl.checks.begin(), dl.checks.end(),
                       [&](const Check& ch) { return ch.home == a.defect; }))
        continue;
      const CheckMeta& m = metas.at(a.defect);
      extra.push_back({a.defect, m.basis, m.support});
    }
    annotate_observable(c, dl, spec.memory_basis, extra);
  }
  validate_ticks(c);
  return c;
}

void annotate_observable(Circuit& c, const DeformedLattice& dl, Basis basis,
                         const std::vector<ExtraCheck>& extra) {
  std::vector<Coord> support = logical_support(dl, basis, extra);
  // the final data layer is the last measurement instruction
  int total = int(c.num_measurements());
  int seen = 0;
  std::map<Coord, int> final_rec;
  for (const auto& ins : c.instructions) {
    if (!is_measurement(ins.op)) continue;
    for (uint32_t q : ins.qubits) {
      Coord coord = c.coords.at(q);
      if (dl.base.is_data(coord)) final_rec[coord] = seen;  // keep the last one
      ++seen;
    }
  }
  Instruction ins{Op::ObservableInclude, {}, {}, {0.0}};
  std::vector<int> recs;
  for (Coord q : support) recs.push_back(final_rec.at(q));
  std::sort(recs.begin(), recs.end());
  for (int rec : recs) ins.rec.push_back(int32_t(rec) - int32_t(total));
  c.append(std::move(ins));
}

}  // namespace dsc
