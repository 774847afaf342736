#include "dsc/lattice.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "dsc/util.hpp"
#include "json.hpp"

namespace dsc {

std::vector<Coord> Lattice::data_qubits() const {
  std::vector<Coord> out;
  for (const auto& [c, r] : qubits)
    if (r == Role::Data) out.push_back(c);
  return out;
}

std::vector<Coord> Lattice::ancilla_qubits() const {
  std::vector<Coord> out;
  for (const auto& [c, r] : qubits)
    if (r != Role::Data) out.push_back(c);
  return out;
}

std::vector<Coord> Lattice::neighbors(Coord c) const {
  std::vector<Coord> out;
  for (Dir d : {Dir::N, Dir::E, Dir::S, Dir::W}) {
    Coord q = c + delta(d);
    if (exists(q)) out.push_back(q);
  }
  return out;
}

std::vector<std::pair<Coord, Coord>> Lattice::couplers() const {
  std::vector<std::pair<Coord, Coord>> out;
  for (const auto& [c, r] : qubits) {
    if (r == Role::Data) continue;
    for (Coord q : neighbors(c)) out.push_back({c, q});
  }
  return out;
}

bool Lattice::on_x_margin(Coord q) const {
  if (diamond) return false;
  int lo = 1, hi = 2 * d - 1;
  if (orient == BoundaryOrientation::XTopBottom) return q.y == lo || q.y == hi;
  return q.x == lo || q.x == hi;
}

bool Lattice::on_z_margin(Coord q) const {
  if (diamond) return false;
  int lo = 1, hi = 2 * d - 1;
  if (orient == BoundaryOrientation::XTopBottom) return q.x == lo || q.x == hi;
  return q.y == lo || q.y == hi;
}

static Basis site_basis(Coord c, BoundaryOrientation orient) {
  int parity = ((c.x / 2) + (c.y / 2)) & 1;
  int x_parity = orient == BoundaryOrientation::XTopBottom ? 0 : 1;
  return parity == x_parity ? Basis::X : Basis::Z;
}

Lattice build_lattice(int d, BoundaryOrientation orient) {
  if (d < 2) throw std::invalid_argument("distance must be >= 2");
  Lattice lat;
  lat.d = d;
  lat.orient = orient;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) lat.qubits[{2 * i + 1, 2 * j + 1}] = Role::Data;

  Basis y_side = orient == BoundaryOrientation::XTopBottom ? Basis::X : Basis::Z;
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d; ++j) {
      Coord c{2 * i, 2 * j};
      Basis b = site_basis(c, orient);
      bool on_y_side = j == 0 || j == d;
      bool on_x_side = i == 0 || i == d;
      if (on_y_side && on_x_side) continue;  // corners never host ancillas
      if (on_y_side && b != y_side) continue;
      if (on_x_side && b != opposite(y_side)) continue;
      lat.qubits[c] = b == Basis::X ? Role::AncillaX : Role::AncillaZ;
    }
  }
  return lat;
}

Lattice build_stability_patch(int k) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("stability patch size must be even and >= 2");
  Lattice lat;
  lat.d = k;
  lat.diamond = true;
  int c = 2 * k;
  auto put = [&](int u, int v, Role r) { lat.qubits[{c + u - v, c - u - v}] = r; };
  for (int u = -k; u <= k; u += 2)
    for (int v = -k; v <= k; v += 2) put(u, v, Role::AncillaX);
  for (int u = -(k - 1); u <= k - 1; u += 2)
    for (int v = -(k - 1); v <= k - 1; v += 2) put(u, v, Role::AncillaZ);
  for (int u = -(k - 1); u <= k - 1; u += 2)
    for (int v = -k; v <= k; v += 2) put(u, v, Role::Data);
  for (int u = -k; u <= k; u += 2)
    for (int v = -(k - 1); v <= k - 1; v += 2) put(u, v, Role::Data);
  return lat;
}

bool DefectSet::is_defective(Coord c) const {
  return std::find(qubits.begin(), qubits.end(), c) != qubits.end();
}

DefectSet sample_defects(const Lattice& lat, double rate, uint64_t seed,
                         double coupler_rate) {
  if (rate < 0 || rate > 1 || coupler_rate < 0 || coupler_rate > 1)
    throw std::invalid_argument("defect rate must be in [0,1]");
  DefectSet out;
  out.rate = rate;
  out.seed = seed;
  for (const auto& [c, r] : lat.qubits) {
    uint64_t h = hash_combine(hash_combine(seed, uint64_t(int64_t(c.x))),
                              uint64_t(int64_t(c.y)) ^ 0x51ULL);
    if (u01(h) < rate) out.qubits.push_back(c);
  }
  if (coupler_rate > 0) {
    for (const auto& [a, b] : lat.couplers()) {
      uint64_t h = hash_combine(hash_combine(hash_combine(seed, 0xC0ULL),
                                             uint64_t(int64_t(a.x)) << 16 ^ uint64_t(int64_t(a.y))),
                                uint64_t(int64_t(b.x)) << 16 ^ uint64_t(int64_t(b.y)));
      if (u01(h) < coupler_rate) out.couplers.push_back({a, b});
    }
  }
  return out;
}

bool DeformedLattice::data_enabled(Coord c) const {
  if (!base.is_data(c)) return false;
  if (disabled_data.count(c)) return false;
  return !defects.is_defective(c);
}

bool DeformedLattice::ancilla_alive(Coord c) const {
  if (!base.is_ancilla(c)) return false;
  if (dropped_ancillas.count(c)) return false;
  if (defects.is_defective(c)) return halma_virtual.count(c) != 0;
  return true;
}

std::vector<Coord> DeformedLattice::enabled_data() const {
  std::vector<Coord> out;
  for (const auto& [c, r] : base.qubits)
    if (r == Role::Data && data_enabled(c)) out.push_back(c);
  return out;
}

const Check* DeformedLattice::check_at(Coord home) const {
  for (const auto& ch : checks)
    if (ch.home == home) return &ch;
  return nullptr;
}

namespace {

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { for (int i = 0; i < n; ++i) p[i] = i; }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

std::vector<Coord> live_support(const Lattice& lat, const DeformedLattice& dl, Coord anc) {
  std::vector<Coord> out;
  for (Coord q : lat.neighbors(anc))
    if (dl.data_enabled(q)) out.push_back(q);
  return out;
}

int overlap_size(const std::vector<Coord>& a, const std::vector<Coord>& b) {
  int n = 0;
  for (const Coord& q : a)
    if (std::find(b.begin(), b.end(), q) != b.end()) ++n;
  return n;
}

std::vector<Coord> dead_data_list(const DeformedLattice& dl) {
  std::vector<Coord> dead;
  for (const auto& [c, r] : dl.base.qubits)
    if (r == Role::Data && !dl.data_enabled(c)) dead.push_back(c);
  return dead;
}

struct RegionScan {
  std::vector<std::vector<Coord>> components;      // dead data per region
  std::vector<std::vector<Coord>> attached;         // truncated checks per region
  std::vector<bool> touches_margin;
  // gauge products commute with every opposite-basis gauge: the region can
  // carry superstabilizers and needs no further deformation
  std::vector<bool> closes;
};

RegionScan scan_regions(const DeformedLattice& dl) {
  const Lattice& lat = dl.base;
  std::vector<Coord> dead = dead_data_list(dl);
  Dsu dsu(int(dead.size()));
  auto idx_of = [&](Coord c) {
    auto it = std::find(dead.begin(), dead.end(), c);
    return it == dead.end() ? -1 : int(it - dead.begin());
  };
  // Dead data sharing an ancilla site belong to one hole; a truncated check
  // touching several dead qubits also joins them.
  for (size_t i = 0; i < dead.size(); ++i)
    for (size_t j = i + 1; j < dead.size(); ++j) {
      Coord d = dead[j] - dead[i];
      if (std::abs(d.x) <= 2 && std::abs(d.y) <= 2) dsu.unite(int(i), int(j));
    }
  for (const auto& [a, role] : lat.qubits) {
    if (role == Role::Data || !dl.ancilla_alive(a)) continue;
    int first = -1;
    for (Coord q : lat.neighbors(a)) {
      if (dl.data_enabled(q) || !lat.is_data(q)) continue;
      int k = idx_of(q);
      if (k < 0) continue;
      if (first < 0) first = k;
      else dsu.unite(first, k);
    }
  }
  RegionScan out;
  std::map<int, int> root_to_region;
  for (size_t i = 0; i < dead.size(); ++i) {
    int r = dsu.find(int(i));
    auto [it, fresh] = root_to_region.try_emplace(r, int(out.components.size()));
    if (fresh) {
      out.components.emplace_back();
      out.attached.emplace_back();
      out.touches_margin.push_back(false);
    }
    out.components[it->second].push_back(dead[i]);
    if (lat.on_x_margin(dead[i]) || lat.on_z_margin(dead[i]))
      out.touches_margin[it->second] = true;
  }
  for (const auto& [a, role] : lat.qubits) {
    if (role == Role::Data || !dl.ancilla_alive(a)) continue;
    auto supp = live_support(lat, dl, a);
    if (supp.size() == lat.neighbors(a).size() || supp.empty()) continue;
    for (Coord q : lat.neighbors(a)) {
      if (dl.data_enabled(q) || !lat.is_data(q)) continue;
      int k = idx_of(q);
      if (k >= 0) {
        int region = root_to_region.at(dsu.find(k));
        auto& v = out.attached[region];
        if (std::find(v.begin(), v.end(), a) == v.end()) v.push_back(a);
        break;
      }
    }
  }
  out.closes.assign(out.components.size(), true);
  for (size_t r = 0; r < out.components.size(); ++r) {
    std::vector<Coord> sx, sz;
    for (Coord a : out.attached[r]) {
      auto supp = live_support(lat, dl, a);
      std::sort(supp.begin(), supp.end());
      auto& merged = lat.ancilla_basis(a) == Basis::X ? sx : sz;
      merged = xor_sorted(merged, supp);
    }
    for (Coord a : out.attached[r]) {
      auto supp = live_support(lat, dl, a);
      const auto& other = lat.ancilla_basis(a) == Basis::X ? sz : sx;
      int overlap = 0;
      for (Coord q : supp)
        if (std::find(other.begin(), other.end(), q) != other.end()) ++overlap;
      if (overlap % 2) out.closes[r] = false;
    }
  }
  return out;
}

// One pass of the boundary support rule. A check counts as functional when
// it keeps weight two, or when it belongs to a region whose superstabilizers
// close (its gauges remain usable as they are).
bool margin_sweep(DeformedLattice& dl, const RegionScan& rs) {
  const Lattice& lat = dl.base;
  if (lat.diamond) return false;
  auto region_of = [&](Coord anc) {
    for (size_t r = 0; r < rs.attached.size(); ++r)
      for (Coord a : rs.attached[r])
        if (a == anc) return int(r);
    return -1;
  };
  bool changed = false;
  for (const auto& [q, role] : lat.qubits) {
    if (role != Role::Data || !dl.data_enabled(q)) continue;
    bool mx = lat.on_x_margin(q), mz = lat.on_z_margin(q);
    if (!mx && !mz) continue;
    int nx = 0, nz = 0;
    for (Coord a : lat.neighbors(q)) {
      if (!dl.ancilla_alive(a)) continue;
      size_t w = live_support(lat, dl, a).size();
      if (w == 0) continue;
      if (w < 2) {
        int r = region_of(a);
        if (r < 0 || !rs.closes[size_t(r)]) continue;
      }
      (lat.ancilla_basis(a) == Basis::X ? nx : nz)++;
    }
    bool ok;
    if (mx && mz) ok = nx >= 1 && nz >= 1;
    else if (mx) ok = nx >= 2 && nz >= 1;
    else ok = nz >= 2 && nx >= 1;
    if (!ok) {
      dl.disabled_data.insert(q);
      changed = true;
    }
  }
  return changed;
}

// Margin-touching holes whose gauge products fail to close cannot carry
// superstabilizers: any odd overlap between truncated checks around such a
// hole drops the weaker check, and data left without coverage on one basis
// get disabled.
bool boundary_repair(DeformedLattice& dl, const RegionScan& rs) {
  const Lattice& lat = dl.base;
  bool changed = false;
  for (size_t r = 0; r < rs.components.size(); ++r) {
    if (!rs.touches_margin[r] || rs.closes[r]) continue;
    const auto& atts = rs.attached[r];
    for (size_t i = 0; i < atts.size(); ++i) {
      for (size_t j = i + 1; j < atts.size(); ++j) {
        Coord a = atts[i], b = atts[j];
        if (!dl.ancilla_alive(a) || !dl.ancilla_alive(b)) continue;
        if (lat.ancilla_basis(a) == lat.ancilla_basis(b)) continue;
        auto sa = live_support(lat, dl, a), sb = live_support(lat, dl, b);
        if (overlap_size(sa, sb) % 2 == 0) continue;
        Coord victim;
        if (sa.size() != sb.size()) victim = sa.size() < sb.size() ? a : b;
        else if (lat.ancilla_basis(a) == Basis::Z) victim = a;
        else victim = b;
        dl.dropped_ancillas.insert(victim);
        changed = true;
      }
    }
  }
  // Orphaned data: no live check on one basis means the qubit cannot carry
  // code information.
  for (const auto& [q, role] : lat.qubits) {
    if (role != Role::Data || !dl.data_enabled(q)) continue;
    int nx = 0, nz = 0;
    for (Coord a : lat.neighbors(q)) {
      if (!dl.ancilla_alive(a)) continue;
      if (live_support(lat, dl, a).empty()) continue;
      (lat.ancilla_basis(a) == Basis::X ? nx : nz)++;
    }
    if (nx == 0 || nz == 0) {
      dl.disabled_data.insert(q);
      changed = true;
    }
  }
  return changed;
}

}  // namespace

std::vector<SuperstabilizerRegion> build_superstabilizers(DeformedLattice& dl, int weight_cap) {
  const Lattice& lat = dl.base;
  dl.checks.clear();
  dl.regions.clear();
  RegionScan rs = scan_regions(dl);
  // region index by dead datum
  std::map<Coord, int> region_of;
  for (size_t r = 0; r < rs.components.size(); ++r)
    for (Coord q : rs.components[r]) region_of[q] = int(r);

  for (size_t r = 0; r < rs.components.size(); ++r) {
    SuperstabilizerRegion reg;
    reg.id = int(r);
    reg.dead_data = rs.components[r];
    std::sort(reg.dead_data.begin(), reg.dead_data.end());
    reg.touches_margin = rs.touches_margin[r];
    dl.regions.push_back(reg);
  }

  for (const auto& [a, role] : lat.qubits) {
    if (role == Role::Data || !dl.ancilla_alive(a)) continue;
    auto supp = live_support(lat, dl, a);
    if (supp.empty()) continue;
    Check ch;
    ch.home = a;
    ch.basis = lat.ancilla_basis(a);
    std::sort(supp.begin(), supp.end());
    ch.support = supp;
    if (supp.size() < lat.neighbors(a).size()) {
      for (Coord q : lat.neighbors(a)) {
        if (dl.data_enabled(q)) continue;
        auto it = region_of.find(q);
        if (it != region_of.end()) { ch.region = it->second; break; }
      }
    }
    dl.checks.push_back(ch);
  }

  for (auto& reg : dl.regions) {
    std::vector<Coord> mx, mz;
    for (const auto& ch : dl.checks) {
      if (ch.region != reg.id) continue;
      GaugeOp g{ch.home, ch.support};
      if (ch.basis == Basis::X) {
        reg.x_gauges.push_back(g);
        mx = xor_sorted(mx, ch.support);
      } else {
        reg.z_gauges.push_back(g);
        mz = xor_sorted(mz, ch.support);
      }
    }
    reg.merged_support_x = mx;
    reg.merged_support_z = mz;
    reg.oversize = int(mx.size()) > weight_cap || int(mz.size()) > weight_cap;
  }

  int nx = 0, nz = 0;
  for (const auto& ch : dl.checks) (ch.basis == Basis::X ? nx : nz)++;
  dl.degenerate = dl.enabled_data().empty() || nx == 0 || nz == 0;
  return dl.regions;
}

DeformedLattice deform_boundary(const Lattice& lat, const DefectSet& defects,
                                bool halma_aware, const std::set<Coord>& extra_disabled,
                                const std::set<Coord>* routed_boundary) {
  DeformedLattice dl;
  dl.base = lat;
  dl.defects = defects;
  for (Coord q : extra_disabled)
    if (lat.is_data(q) && !defects.is_defective(q)) dl.disabled_data.insert(q);
  // coupler defects disable the data endpoint
  for (const auto& [a, b] : defects.couplers) {
    Coord q = lat.is_data(a) ? a : b;
    if (lat.is_data(q) && !defects.is_defective(q)) dl.disabled_data.insert(q);
  }
  if (routed_boundary) {
    for (Coord a : *routed_boundary)
      if (lat.is_ancilla(a)) dl.halma_virtual.insert(a);
  } else if (halma_aware) {
    // A defective ancilla that routing will handle keeps its stabilizer, so
    // it counts as functional during deformation. The heuristic here matches
    // the baseline strategy: isolated defects, with an intact partner in the
    // boundary case.
    for (Coord a : defects.qubits) {
      if (!lat.is_ancilla(a)) continue;
      auto supp = lat.neighbors(a);
      if (supp.size() == 2) {
        Coord partner{0, 0};
        bool found = false;
        for (Coord p : lat.neighbors(supp[0])) {
          if (p == a || !lat.is_ancilla(p)) continue;
          auto ps = lat.neighbors(p);
          if (std::find(ps.begin(), ps.end(), supp[1]) != ps.end()) { partner = p; found = true; }
        }
        if (!found || defects.is_defective(partner)) continue;
      } else if (supp.size() != 4) {
        continue;
      }
      bool crowded = false;
      for (Coord q : defects.qubits) {
        if (q == a) continue;
        if (std::abs(q.x - a.x) + std::abs(q.y - a.y) <= 4) crowded = true;
      }
      for (const auto& [ca, cb] : defects.couplers) {
        Coord q = lat.is_data(ca) ? ca : cb;
        if (std::abs(q.x - a.x) + std::abs(q.y - a.y) <= 4) crowded = true;
      }
      if (!crowded) dl.halma_virtual.insert(a);
    }
  }
  int guard = int(lat.qubits.size()) * 4 + 8;
  for (int pass = 0; pass < guard; ++pass) {
    RegionScan rs = scan_regions(dl);
    bool changed = margin_sweep(dl, rs);
    changed |= boundary_repair(dl, rs);
    if (!changed) break;
  }
  build_superstabilizers(dl);
  return dl;
}

std::string lattice_json(const DeformedLattice& dl) {
  nlohmann::ordered_json j;
  j["d"] = dl.base.d;
  j["seed"] = dl.defects.seed;
  j["rate"] = dl.defects.rate;
  auto coords = [](const std::vector<Coord>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const Coord& c : v) a.push_back({c.x, c.y});
    return a;
  };
  std::vector<Coord> defq = dl.defects.qubits;
  std::sort(defq.begin(), defq.end());
  j["defective_qubits"] = coords(defq);
  std::vector<Coord> dis(dl.disabled_data.begin(), dl.disabled_data.end());
  j["disabled"] = coords(dis);
  return j.dump(2) + "\n";
}

DeformedLattice lattice_from_json(const std::string& text, bool halma_aware) {
  auto j = nlohmann::json::parse(text);
  Lattice lat = build_lattice(j.at("d").get<int>());
  DefectSet defs;
  defs.seed = j.at("seed").get<uint64_t>();
  defs.rate = j.at("rate").get<double>();
  for (const auto& c : j.at("defective_qubits")) defs.qubits.push_back({c[0], c[1]});
  std::set<Coord> disabled;
  for (const auto& c : j.at("disabled")) disabled.insert(Coord{c[0], c[1]});
  return deform_boundary(lat, defs, halma_aware, disabled);
}

}  // namespace dsc
