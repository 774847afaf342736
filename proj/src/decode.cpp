#include "dsc/decode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dsc/util.hpp"

namespace dsc {

namespace {

constexpr uint32_t kObsBit = 0x80000000u;

// sorted target ids; id < kObsBit: detector, otherwise observable index
using Sens = std::vector<uint32_t>;

struct QubitSens {
  Sens x, z;
};

}  // namespace

Dem extract_dem(const Circuit& noisy) {
  // forward pass: absolute record index -> detector/observable ids
  size_t num_meas = noisy.num_measurements();
  std::vector<Sens> rec_targets(num_meas);
  size_t det_count = 0;
  uint32_t obs_count = 0;
  {
    size_t meas_seen = 0;
    for (const auto& ins : noisy.instructions) {
      if (is_measurement(ins.op)) meas_seen += ins.qubits.size();
      if (ins.op == Op::Detector) {
        for (int32_t r : ins.rec) {
          int64_t idx = int64_t(meas_seen) + r;
          if (idx < 0) throw std::runtime_error("detector record offset out of range");
          rec_targets[size_t(idx)].push_back(uint32_t(det_count));
        }
        ++det_count;
      } else if (ins.op == Op::ObservableInclude) {
        uint32_t id = uint32_t(ins.args.at(0));
        obs_count = std::max(obs_count, id + 1);
        for (int32_t r : ins.rec) {
          int64_t idx = int64_t(meas_seen) + r;
          if (idx < 0) throw std::runtime_error("observable record offset out of range");
          rec_targets[size_t(idx)].push_back(kObsBit | id);
        }
      }
    }
    for (auto& t : rec_targets) std::sort(t.begin(), t.end());
  }

  std::vector<QubitSens> sens(noisy.num_qubits());
  std::map<std::pair<std::vector<uint32_t>, uint32_t>, double> merged;
  auto add_mech = [&](const Sens& signature, double p) {
    if (p <= 0 || signature.empty()) return;
    std::vector<uint32_t> dets;
    uint32_t obs = 0;
    for (uint32_t t : signature) {
      if (t & kObsBit) obs ^= 1u << (t & ~kObsBit);
      else dets.push_back(t);
    }
    if (dets.empty() && obs == 0) return;
    double& q = merged[{dets, obs}];
    q = q * (1 - p) + p * (1 - q);
  };

  size_t rec_cursor = num_meas;
  for (auto it = noisy.instructions.rbegin(); it != noisy.instructions.rend(); ++it) {
    const Instruction& ins = *it;
    switch (ins.op) {
      case Op::Tick:
      case Op::Detector:
      case Op::ObservableInclude:
      case Op::QubitCoords:
        break;
      case Op::MR:
      case Op::MRX:
        for (auto q = ins.qubits.rbegin(); q != ins.qubits.rend(); ++q) {
          --rec_cursor;
          sens[*q].x.clear();
          sens[*q].z.clear();
          if (ins.op == Op::MR) sens[*q].x = rec_targets[rec_cursor];
          else sens[*q].z = rec_targets[rec_cursor];
        }
        break;
      case Op::R:
      case Op::RX:
        for (uint32_t q : ins.qubits) {
          sens[q].x.clear();
          sens[q].z.clear();
        }
        break;
      case Op::H:
        for (uint32_t q : ins.qubits) std::swap(sens[q].x, sens[q].z);
        break;
      case Op::CNOT:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) {
          uint32_t c = ins.qubits[i], t = ins.qubits[i + 1];
          // X_c -> X_c X_t ; Z_t -> Z_c Z_t
          xor_into(sens[c].x, sens[t].x);
          xor_into(sens[t].z, sens[c].z);
        }
        break;
      case Op::CXSWAP:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) {
          uint32_t c = ins.qubits[i], t = ins.qubits[i + 1];
          // X_c -> X_c X_t ; X_t -> X_c ; Z_c -> Z_t ; Z_t -> Z_c Z_t
          Sens xc = xor_sorted(sens[c].x, sens[t].x);
          Sens xt = sens[c].x;
          Sens zc = sens[t].z;
          Sens zt = xor_sorted(sens[c].z, sens[t].z);
          sens[c].x = std::move(xc);
          sens[t].x = std::move(xt);
          sens[c].z = std::move(zc);
          sens[t].z = std::move(zt);
        }
        break;
      case Op::SWAPCX:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) {
          uint32_t c = ins.qubits[i], t = ins.qubits[i + 1];
          // X_c -> X_t ; X_t -> X_c X_t ; Z_c -> Z_c Z_t ; Z_t -> Z_c
          Sens xc = sens[t].x;
          Sens xt = xor_sorted(sens[c].x, sens[t].x);
          Sens zc = xor_sorted(sens[c].z, sens[t].z);
          Sens zt = sens[c].z;
          sens[c].x = std::move(xc);
          sens[t].x = std::move(xt);
          sens[c].z = std::move(zc);
          sens[t].z = std::move(zt);
        }
        break;
      case Op::XError:
        for (uint32_t q : ins.qubits) add_mech(sens[q].x, ins.args.at(0));
        break;
      case Op::ZError:
        for (uint32_t q : ins.qubits) add_mech(sens[q].z, ins.args.at(0));
        break;
      case Op::Depolarize1:
        for (uint32_t q : ins.qubits) {
          double p = ins.args.at(0) / 3;
          add_mech(sens[q].x, p);
          add_mech(sens[q].z, p);
          add_mech(xor_sorted(sens[q].x, sens[q].z), p);
        }
        break;
      case Op::Depolarize2:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) {
          uint32_t a = ins.qubits[i], b = ins.qubits[i + 1];
          double p = ins.args.at(0) / 15;
          Sens pa[4] = {{}, sens[a].x, xor_sorted(sens[a].x, sens[a].z), sens[a].z};
          Sens pb[4] = {{}, sens[b].x, xor_sorted(sens[b].x, sens[b].z), sens[b].z};
          for (int ia = 0; ia < 4; ++ia)
            for (int ib = 0; ib < 4; ++ib) {
              if (ia == 0 && ib == 0) continue;
              add_mech(xor_sorted(pa[ia], pb[ib]), p);
            }
        }
        break;
    }
  }

  Dem dem;
  dem.num_dets = det_count;
  dem.num_obs = obs_count;
  for (const auto& [key, p] : merged) {
    if (p <= 0) continue;
    Mechanism m;
    m.dets = key.first;
    m.obs = key.second;
    m.p = std::min(p, 0.5);
    dem.mechanisms.push_back(std::move(m));
  }
  return dem;
}

std::string dem_text(const Dem& dem) {
  std::ostringstream out;
  out << "num_detectors " << dem.num_dets << "\n";
  out << "num_observables " << dem.num_obs << "\n";
  char buf[64];
  for (const auto& m : dem.mechanisms) {
    std::snprintf(buf, sizeof buf, "%.10g", m.p);
    out << "error(" << buf << ")";
    for (uint32_t d : m.dets) out << " D" << d;
    for (uint32_t o = 0; o < 32; ++o)
      if (m.obs & (1u << o)) out << " L" << o;
    out << "\n";
  }
  return out.str();
}

Dem dem_from_text(const std::string& text) {
  Dem dem;
  int line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("num_detectors", 0) == 0) {
      dem.num_dets = std::stoul(trim(line.substr(13)));
      continue;
    }
    if (line.rfind("num_observables", 0) == 0) {
      dem.num_obs = std::stoul(trim(line.substr(15)));
      continue;
    }
    if (line.rfind("error(", 0) != 0)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected error(...)");
    size_t close = line.find(')');
    if (close == std::string::npos)
      throw std::runtime_error("line " + std::to_string(line_no) + ": missing ')'");
    Mechanism m;
    m.p = std::stod(line.substr(6, close - 6));
    for (auto& tok : split(line.substr(close + 1), ' ')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      if (tok[0] == 'D') {
        m.dets.push_back(uint32_t(std::stoul(tok.substr(1))));
        dem.num_dets = std::max(dem.num_dets, size_t(m.dets.back() + 1));
      } else if (tok[0] == 'L') {
        uint32_t o = uint32_t(std::stoul(tok.substr(1)));
        m.obs |= 1u << o;
        dem.num_obs = std::max(dem.num_obs, size_t(o + 1));
      } else {
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad target " + tok);
      }
    }
    std::sort(m.dets.begin(), m.dets.end());
    dem.mechanisms.push_back(std::move(m));
  }
  return dem;
}

MatchingGraph build_graph(const Dem& dem) {
  MatchingGraph g;
  g.num_dets = int(dem.num_dets);
  g.num_obs = int(dem.num_obs);
  int boundary = g.boundary();

  std::map<std::vector<uint32_t>, size_t> edge_index;
  auto upsert = [&](const std::vector<uint32_t>& dets, double p, uint32_t obs) {
    auto it = edge_index.find(dets);
    if (it != edge_index.end()) {
      GraphEdge& e = g.edges[it->second];
      e.p = e.p * (1 - p) + p * (1 - e.p);
      return;
    }
    GraphEdge e;
    e.u = dets.empty() ? boundary : int(dets[0]);
    e.v = dets.size() < 2 ? boundary : int(dets[1]);
    e.p = p;
    e.obs = obs;
    edge_index[dets] = g.edges.size();
    g.edges.push_back(e);
  };

  for (const auto& m : dem.mechanisms)
    if (m.dets.size() <= 2 && !(m.dets.empty() && m.obs == 0)) upsert(m.dets, m.p, m.obs);

  for (const auto& m : dem.mechanisms) {
    if (m.dets.size() <= 2) continue;
    if (m.dets.size() > 4) {
      g.dropped_mass += m.p;
      continue;
    }
    size_t n = m.dets.size();
    std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>> splits;
    if (n == 3) {
      for (size_t i = 0; i < 3; ++i) {
        std::vector<uint32_t> a, b;
        for (size_t k = 0; k < 3; ++k) (k == i ? a : b).push_back(m.dets[k]);
        splits.push_back({a, b});
      }
    } else {
      for (size_t j = 1; j < 4; ++j) {
        std::vector<uint32_t> a{m.dets[0], m.dets[j]}, b;
        for (size_t k = 1; k < 4; ++k)
          if (k != j) b.push_back(m.dets[k]);
        splits.push_back({a, b});
      }
    }
    bool done = false;
    for (auto& [a, b] : splits) {
      auto ia = edge_index.find(a);
      auto ib = edge_index.find(b);
      if (ia == edge_index.end() || ib == edge_index.end()) continue;
      uint32_t oa = g.edges[ia->second].obs;
      uint32_t ob = g.edges[ib->second].obs;
      if ((oa ^ ob) != m.obs) continue;
      upsert(a, m.p, oa);
      upsert(b, m.p, ob);
      done = true;
      break;
    }
    if (!done) {
      for (auto& [a, b] : splits) {
        auto ia = edge_index.find(a);
        auto ib = edge_index.find(b);
        if (ia == edge_index.end() || ib == edge_index.end()) continue;
        upsert(a, m.p, g.edges[ia->second].obs);
        upsert(b, m.p, g.edges[ib->second].obs);
        done = true;
        break;
      }
    }
    if (!done) g.dropped_mass += m.p;
  }

  for (auto& e : g.edges) {
    double p = std::min(std::max(e.p, 1e-12), 0.5);
    e.weight = std::max(1, int(std::lround(4.0 * std::log((1 - p) / p))));
  }
  g.adj.assign(size_t(g.num_dets) + 1, {});
  for (size_t i = 0; i < g.edges.size(); ++i) {
    g.adj[g.edges[i].u].push_back(int(i));
    if (g.edges[i].v != g.edges[i].u) g.adj[g.edges[i].v].push_back(int(i));
  }
  return g;
}

namespace {

struct UfState {
  const MatchingGraph* g;
  std::vector<int> parent, rnk, parity;
  std::vector<uint8_t> has_boundary;
  std::vector<int> grown;
  std::vector<uint8_t> on_tree;
  std::vector<std::vector<int>> border;

  explicit UfState(const MatchingGraph& graph) : g(&graph) {
    int n = g->num_dets + 1;
    parent.resize(n);
    rnk.assign(n, 0);
    parity.assign(n, 0);
    has_boundary.assign(n, 0);
    for (int i = 0; i < n; ++i) parent[i] = i;
    has_boundary[g->num_dets] = 1;
    grown.assign(g->edges.size(), 0);
    on_tree.assign(g->edges.size(), 0);
    border.assign(n, {});
  }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rnk[a] < rnk[b]) std::swap(a, b);
    parent[b] = a;
    if (rnk[a] == rnk[b]) ++rnk[a];
    parity[a] ^= parity[b];
    has_boundary[a] |= has_boundary[b];
    if (border[a].size() < border[b].size()) std::swap(border[a], border[b]);
    border[a].insert(border[a].end(), border[b].begin(), border[b].end());
    border[b].clear();
  }
};

}  // namespace

uint32_t UfDecoder::decode(const std::vector<uint8_t>& syndrome) const {
  const MatchingGraph& g = *g_;
  if (int(syndrome.size()) != g.num_dets)
    throw std::invalid_argument("syndrome length mismatch");
  std::vector<int> defects;
  for (int d = 0; d < g.num_dets; ++d)
    if (syndrome[d]) defects.push_back(d);
  if (defects.empty()) return 0;

  UfState st(g);
  for (int d : defects) {
    st.parity[d] = 1;
    st.border[d] = g.adj[d];
  }
  auto active = [&](int root) { return st.parity[root] == 1 && !st.has_boundary[root]; };

  while (true) {
    int best = -1;
    for (int d : defects) {
      int r = st.find(d);
      if (!active(r)) continue;
      if (best < 0 || st.border[r].size() < st.border[best].size()) best = r;
    }
    if (best < 0) break;
    std::vector<int> edges = std::move(st.border[best]);
    st.border[best].clear();
    std::vector<int> keep, merged;
    for (int ei : edges) {
      const GraphEdge& e = g.edges[ei];
      if (st.find(e.u) == st.find(e.v)) continue;
      if (st.grown[ei] >= e.weight) continue;
      ++st.grown[ei];
      if (st.grown[ei] >= e.weight) merged.push_back(ei);
      else keep.push_back(ei);
    }
    st.border[best] = std::move(keep);
    for (int ei : merged) {
      const GraphEdge& e = g.edges[ei];
      st.on_tree[ei] = 1;
      int ru = st.find(e.u), rv = st.find(e.v);
      if (ru == rv) continue;
      // bring in the freshly absorbed node's adjacency
      for (int node : {e.u, e.v}) {
        int rn = st.find(node);
        if (node == g.num_dets) continue;
        if (rn != st.find(best) && st.border[rn].empty() && st.parity[rn] == 0 &&
            !st.has_boundary[rn])
          st.border[rn] = g.adj[node];
      }
      st.unite(ru, rv);
    }
    int root = st.find(best);
    std::vector<int> fresh;
    for (int ei : st.border[root]) {
      const GraphEdge& e = g.edges[ei];
      if (st.find(e.u) != st.find(e.v)) fresh.push_back(ei);
    }
    st.border[root] = std::move(fresh);
  }

  // peel the grown forest
  std::vector<uint8_t> synd(syndrome);
  uint32_t obs = 0;
  int n = g.num_dets + 1;
  std::vector<std::vector<int>> tadj(n);
  for (size_t i = 0; i < g.edges.size(); ++i)
    if (st.on_tree[i]) {
      tadj[g.edges[i].u].push_back(int(i));
      tadj[g.edges[i].v].push_back(int(i));
    }
  std::vector<int> order;
  std::vector<int> parent_edge(n, -1), parent_node(n, -1);
  std::vector<uint8_t> seen(n, 0);
  std::deque<int> queue;
  auto bfs = [&](int start) {
    seen[start] = 1;
    queue.push_back(start);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (int ei : tadj[u]) {
        const GraphEdge& e = g.edges[ei];
        int v = e.u == u ? e.v : e.u;
        if (seen[v]) continue;
        seen[v] = 1;
        parent_edge[v] = ei;
        parent_node[v] = u;
        queue.push_back(v);
      }
    }
  };
  bfs(g.num_dets);
  for (int v = 0; v < g.num_dets; ++v)
    if (!seen[v] && !tadj[v].empty()) bfs(v);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (parent_edge[v] < 0) continue;
    if (synd[v]) {
      obs ^= g.edges[parent_edge[v]].obs;
      synd[v] = 0;
      int u = parent_node[v];
      if (u != g.num_dets) synd[u] ^= 1;
    }
  }
  return obs;
}

uint32_t decode_ml(const Dem& dem, const std::vector<uint8_t>& syndrome, size_t max_mechanisms) {
  size_t n = dem.mechanisms.size();
  if (n > max_mechanisms) throw std::invalid_argument("DEM too large for exact ML");
  size_t words = (dem.num_dets + 63) / 64 + 1;
  size_t num_classes = size_t(1) << dem.num_obs;
  size_t half = n / 2;
  auto enumerate = [&](size_t lo, size_t hi) {
    std::map<std::vector<uint64_t>, std::vector<double>> out;
    size_t m = hi - lo;
    for (size_t mask = 0; mask < (size_t(1) << m); ++mask) {
      std::vector<uint64_t> synd(words, 0);
      uint32_t obs = 0;
      double p = 1;
      for (size_t i = 0; i < m; ++i) {
        const Mechanism& mech = dem.mechanisms[lo + i];
        if (mask & (size_t(1) << i)) {
          p *= mech.p;
          obs ^= mech.obs;
          for (uint32_t d : mech.dets) synd[d / 64] ^= 1ULL << (d % 64);
        } else {
          p *= 1 - mech.p;
        }
      }
      auto& cls = out[synd];
      if (cls.empty()) cls.assign(num_classes, 0.0);
      cls[obs] += p;
    }
    return out;
  };
  auto left = enumerate(0, half);
  auto right = enumerate(half, n);
  std::vector<uint64_t> target(words, 0);
  for (size_t d = 0; d < syndrome.size(); ++d)
    if (syndrome[d]) target[d / 64] ^= 1ULL << (d % 64);
  std::vector<double> total(num_classes, 0.0);
  for (const auto& [rs, rcls] : right) {
    std::vector<uint64_t> need(words);
    for (size_t w = 0; w < words; ++w) need[w] = target[w] ^ rs[w];
    auto it = left.find(need);
    if (it == left.end()) continue;
    for (size_t a = 0; a < num_classes; ++a)
      for (size_t b = 0; b < num_classes; ++b) total[a ^ b] += it->second[a] * rcls[b];
  }
  double best = -1;
  for (double t : total) best = std::max(best, t);
  std::vector<size_t> tied;
  for (size_t cls = 0; cls < num_classes; ++cls)
    if (total[cls] >= best * (1 - 1e-9)) tied.push_back(cls);
  if (tied.size() > 1) {
    for (const auto& m : dem.mechanisms) {
      std::vector<uint8_t> s(dem.num_dets, 0);
      for (uint32_t d : m.dets) s[d] ^= 1;
      if (s == syndrome && std::find(tied.begin(), tied.end(), size_t(m.obs)) != tied.end())
        return m.obs;
    }
  }
  return uint32_t(tied[0]);
}

MinWeightResult min_weight_logical(const Dem& dem, int weight_cap) {
  for (const auto& m : dem.mechanisms)
    if (m.dets.empty() && m.obs != 0) return {true, 1};
  MatchingGraph g = build_graph(dem);
  int nodes = g.num_dets + 1;
  size_t masks = size_t(1) << std::max(1, g.num_obs);
  std::vector<int> starts;
  {
    std::vector<uint8_t> mark(nodes, 0);
    for (const auto& e : g.edges)
      if (e.obs) {
        mark[e.u] = 1;
        mark[e.v] = 1;
      }
    for (int i = 0; i < nodes; ++i)
      if (mark[i]) starts.push_back(i);
  }
  int best = weight_cap + 1;
  for (int s : starts) {
    std::vector<int> dist(size_t(nodes) * masks, weight_cap + 1);
    std::deque<std::pair<int, uint32_t>> q;
    dist[size_t(s) * masks] = 0;
    q.push_back({s, 0});
    while (!q.empty()) {
      auto [u, m] = q.front();
      q.pop_front();
      int d = dist[size_t(u) * masks + m];
      if (d + 1 >= best) continue;
      for (int ei : g.adj[u]) {
        const GraphEdge& e = g.edges[ei];
        int v = e.u == u ? e.v : e.u;
        uint32_t nm = (m ^ e.obs) & uint32_t(masks - 1);
        if (v == s && nm != 0) best = std::min(best, d + 1);
        if (dist[size_t(v) * masks + nm] > d + 1) {
          dist[size_t(v) * masks + nm] = d + 1;
          q.push_back({v, nm});
        }
      }
    }
  }
  if (best <= weight_cap) return {true, best};
  return {false, weight_cap};
}

}  // namespace dsc
