#include "dsc/sim.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>

namespace dsc {

std::string PauliPair::str() const {
  auto ch = [](bool x, bool z) { return x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I'); };
  return std::string(1, ch(x1, z1)) + ch(x2, z2);
}

PauliPair conjugate(Op gate, const PauliPair& p) {
  PauliPair q;
  switch (gate) {
    case Op::CNOT:
      q.x1 = p.x1;
      q.x2 = p.x2 ^ p.x1;
      q.z1 = p.z1 ^ p.z2;
      q.z2 = p.z2;
      return q;
    case Op::CXSWAP:
      q.x1 = p.x1 ^ p.x2;
      q.x2 = p.x1;
      q.z1 = p.z2;
      q.z2 = p.z1 ^ p.z2;
      return q;
    case Op::SWAPCX:
      q.x1 = p.x2;
      q.x2 = p.x1 ^ p.x2;
      q.z1 = p.z1 ^ p.z2;
      q.z2 = p.z1;
      return q;
    case Op::H:
      q.x1 = p.z1;
      q.z1 = p.x1;
      q.x2 = p.x2;
      q.z2 = p.z2;
      return q;
    default:
      throw std::invalid_argument(std::string("unsupported gate for conjugation: ") + op_name(gate));
  }
}

TableauSim::TableauSim(int n) : n_(n) {
  x_.assign(2 * n, BitRow(n));
  z_.assign(2 * n, BitRow(n));
  r_.assign(2 * n, Expr{});
  for (int i = 0; i < n; ++i) {
    x_[i].set(i);       // destabilizer X_i
    z_[n + i].set(i);   // stabilizer Z_i
  }
}

void TableauSim::h(int q) {
  for (int i = 0; i < 2 * n_; ++i) {
    bool xb = x_[i].get(q), zb = z_[i].get(q);
    if (xb && zb) r_[i].c0 ^= 1;
    if (xb != zb) {
      if (xb) { x_[i].w[q / 64] &= ~(1ULL << (q % 64)); z_[i].set(q); }
      else { z_[i].w[q / 64] &= ~(1ULL << (q % 64)); x_[i].set(q); }
    }
  }
}

void TableauSim::cnot(int c, int t) {
  for (int i = 0; i < 2 * n_; ++i) {
    bool xc = x_[i].get(c), zc = z_[i].get(c), xt = x_[i].get(t), zt = z_[i].get(t);
    if (xc && zt && (xt == zc)) r_[i].c0 ^= 1;
    if (xc) x_[i].w[t / 64] ^= 1ULL << (t % 64);
    if (zt) z_[i].w[c / 64] ^= 1ULL << (c % 64);
  }
}

void TableauSim::swap_qubits(int a, int b) {
  for (int i = 0; i < 2 * n_; ++i) {
    bool xa = x_[i].get(a), xb2 = x_[i].get(b), za = z_[i].get(a), zb = z_[i].get(b);
    if (xa != xb2) { x_[i].w[a / 64] ^= 1ULL << (a % 64); x_[i].w[b / 64] ^= 1ULL << (b % 64); }
    if (za != zb) { z_[i].w[a / 64] ^= 1ULL << (a % 64); z_[i].w[b / 64] ^= 1ULL << (b % 64); }
  }
}

void TableauSim::cxswap(int c, int t) { cnot(c, t); swap_qubits(c, t); }
void TableauSim::swapcx(int c, int t) { swap_qubits(c, t); cnot(c, t); }

void TableauSim::pauli_x(int q) {
  for (int i = 0; i < 2 * n_; ++i)
    if (z_[i].get(q)) r_[i].c0 ^= 1;
}

void TableauSim::pauli_z(int q) {
  for (int i = 0; i < 2 * n_; ++i)
    if (x_[i].get(q)) r_[i].c0 ^= 1;
}

void TableauSim::rowsum(int h, int i) {
  if (h < n_) {
    // destabilizer phases are never read; track bits only
    x_[h] ^= x_[i];
    z_[h] ^= z_[i];
    return;
  }
  // phase exponent of i^g accumulated over columns; total stays even
  int g = 0;
  for (int q = 0; q < n_; ++q) {
    int x1 = x_[i].get(q), z1 = z_[i].get(q), x2 = x_[h].get(q), z2 = z_[h].get(q);
    if (!x1 && !z1) continue;
    if (x1 && z1) g += z2 - x2;
    else if (x1) g += z2 * (2 * x2 - 1);
    else g += x2 * (1 - 2 * z2);
  }
  int total = 2 * (r_[h].c0 ? 1 : 0) + 2 * (r_[i].c0 ? 1 : 0) + g;
  total %= 4;
  if (total < 0) total += 4;
  assert(total % 2 == 0);
  bool new_c0 = total == 2;
  Expr coins = r_[h];
  coins.c0 = false;
  Expr other = r_[i];
  other.c0 = false;
  coins ^= other;
  r_[h] = coins;
  r_[h].c0 = new_c0;
  x_[h] ^= x_[i];
  z_[h] ^= z_[i];
}

TableauSim::Expr TableauSim::measure_z(int q) {
  int p = -1;
  for (int i = n_; i < 2 * n_; ++i)
    if (x_[i].get(q)) { p = i; break; }
  if (p >= 0) {
    for (int i = 0; i < 2 * n_; ++i)
      if (i != p && x_[i].get(q)) rowsum(i, p);
    x_[p - n_] = x_[p];
    z_[p - n_] = z_[p];
    r_[p - n_] = r_[p];
    x_[p] = BitRow(n_);
    z_[p] = BitRow(n_);
    z_[p].set(q);
    Expr out;
    out.coins.push_back(coin_count_++);
    r_[p] = out;
    return out;
  }
  // deterministic: accumulate destabilizer rows into scratch
  BitRow sx(n_), sz(n_);
  Expr phase;
  int g_total = 0;
  for (int i = 0; i < n_; ++i) {
    if (!x_[i].get(q)) continue;
    int stab = i + n_;
    int g = 0;
    for (int col = 0; col < n_; ++col) {
      int x1 = x_[stab].get(col), z1 = z_[stab].get(col), x2 = sx.get(col), z2 = sz.get(col);
      if (!x1 && !z1) continue;
      if (x1 && z1) g += z2 - x2;
      else if (x1) g += z2 * (2 * x2 - 1);
      else g += x2 * (1 - 2 * z2);
    }
    g_total += g + 2 * (r_[stab].c0 ? 1 : 0);
    Expr coins = r_[stab];
    coins.c0 = false;
    phase ^= coins;
    sx ^= x_[stab];
    sz ^= z_[stab];
  }
  g_total %= 4;
  if (g_total < 0) g_total += 4;
  assert(g_total % 2 == 0);
  phase.c0 = g_total == 2;
  return phase;
}

void TableauSim::x_if(int q, const Expr& e) {
  if (!e.c0 && e.coins.empty()) return;
  for (int i = 0; i < 2 * n_; ++i)
    if (z_[i].get(q)) r_[i] ^= e;
}

TableauSim::Expr TableauSim::mr(int q) {
  Expr e = measure_z(q);
  x_if(q, e);
  return e;
}

TableauSim::Expr TableauSim::mrx(int q) {
  h(q);
  Expr e = mr(q);
  h(q);
  return e;
}

void TableauSim::reset_z(int q) { mr(q); }
void TableauSim::reset_x(int q) { mrx(q); }

bool TableauRunResult::all_detectors_deterministic() const {
  for (const auto& d : detectors)
    if (!d.deterministic) return false;
  for (const auto& d : observables)
    if (!d.deterministic) return false;
  return true;
}

bool TableauRunResult::all_deterministic_zero() const {
  for (const auto& d : detectors)
    if (!d.deterministic || d.value) return false;
  for (const auto& d : observables)
    if (!d.deterministic || d.value) return false;
  return true;
}

namespace {

template <typename MeasureFn, typename NoiseFn>
void walk_circuit(const Circuit& c, TableauSim& sim, MeasureFn&& on_measure, NoiseFn&& on_noise,
                  std::vector<TableauSim::Expr>* recs,
                  std::vector<DetectorReport>* dets, std::vector<DetectorReport>* obs) {
  std::map<int, TableauSim::Expr> obs_acc;
  size_t instr_index = 0;
  for (const auto& ins : c.instructions) {
    ++instr_index;
    switch (ins.op) {
      case Op::Tick:
        break;
      case Op::CNOT:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) sim.cnot(ins.qubits[i], ins.qubits[i + 1]);
        break;
      case Op::CXSWAP:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) sim.cxswap(ins.qubits[i], ins.qubits[i + 1]);
        break;
      case Op::SWAPCX:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) sim.swapcx(ins.qubits[i], ins.qubits[i + 1]);
        break;
      case Op::H:
        for (uint32_t q : ins.qubits) sim.h(q);
        break;
      case Op::R:
        for (uint32_t q : ins.qubits) sim.reset_z(q);
        break;
      case Op::RX:
        for (uint32_t q : ins.qubits) sim.reset_x(q);
        break;
      case Op::MR:
        for (uint32_t q : ins.qubits) {
          auto e = sim.mr(q);
          on_measure(e);
          recs->push_back(e);
        }
        break;
      case Op::MRX:
        for (uint32_t q : ins.qubits) {
          auto e = sim.mrx(q);
          on_measure(e);
          recs->push_back(e);
        }
        break;
      case Op::Depolarize1:
      case Op::Depolarize2:
      case Op::XError:
      case Op::ZError:
        on_noise(ins, instr_index - 1);
        break;
      case Op::Detector: {
        TableauSim::Expr acc;
        for (int32_t r : ins.rec) {
          size_t idx = recs->size() + r;
          if (r >= 0 || idx >= recs->size())
            throw std::runtime_error("detector record offset out of range");
          acc ^= (*recs)[idx];
        }
        dets->push_back({acc.deterministic(), acc.c0});
        break;
      }
      case Op::ObservableInclude: {
        int id = int(ins.args.at(0));
        TableauSim::Expr acc;
        for (int32_t r : ins.rec) {
          size_t idx = recs->size() + r;
          if (r >= 0 || idx >= recs->size())
            throw std::runtime_error("observable record offset out of range");
          acc ^= (*recs)[idx];
        }
        while (int(obs->size()) <= id) obs->push_back({true, false});
        auto it = obs_acc.find(id);
        if (it == obs_acc.end()) obs_acc[id] = acc;
        else obs_acc[id] ^= acc;
        (*obs)[id] = {obs_acc[id].deterministic(), obs_acc[id].c0};
        break;
      }
      case Op::QubitCoords:
        break;
    }
  }
}

}  // namespace

TableauRunResult tableau_run(const Circuit& c) {
  TableauSim sim(int(c.num_qubits()));
  TableauRunResult out;
  walk_circuit(
      c, sim, [](const TableauSim::Expr&) {}, [](const Instruction&, size_t) {},
      &out.measurements, &out.detectors, &out.observables);
  return out;
}

std::vector<uint8_t> tableau_sample_detectors(const Circuit& c, uint64_t seed, uint64_t shot) {
  TableauSim sim(int(c.num_qubits()));
  TableauRunResult out;
  auto apply_pauli = [&](uint32_t q, int pauli) {
    if (pauli == 1 || pauli == 2) sim.pauli_x(q);  // X or Y
    if (pauli == 2 || pauli == 3) sim.pauli_z(q);  // Y or Z
  };
  walk_circuit(
      c, sim, [](const TableauSim::Expr&) {},
      [&](const Instruction& ins, size_t index) {
        double p = ins.args.at(0);
        if (p <= 0) return;
        if (ins.op == Op::Depolarize2) {
          for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) {
            uint64_t h = hash_combine(hash_combine(seed, shot), uint64_t(index) * 4 + i);
            if (u01(h) < p) {
              int which = 1 + int(splitmix64(h ^ 0x777) % 15);
              apply_pauli(ins.qubits[i], which & 3);
              apply_pauli(ins.qubits[i + 1], (which >> 2) & 3);
            }
          }
        } else {
          for (size_t i = 0; i < ins.qubits.size(); ++i) {
            uint64_t h = hash_combine(hash_combine(seed, shot), uint64_t(index) * 4 + i);
            if (u01(h) < p) {
              if (ins.op == Op::XError) apply_pauli(ins.qubits[i], 1);
              else if (ins.op == Op::ZError) apply_pauli(ins.qubits[i], 3);
              else apply_pauli(ins.qubits[i], 1 + int(splitmix64(h ^ 0x777) % 3));
            }
          }
        }
      },
      &out.measurements, &out.detectors, &out.observables);
  std::vector<uint8_t> bits;
  for (const auto& d : out.detectors) {
    if (!d.deterministic) throw std::runtime_error("detector not deterministic under injected Paulis");
    bits.push_back(d.value ? 1 : 0);
  }
  for (const auto& d : out.observables) bits.push_back(d.value ? 1 : 0);
  return bits;
}

FrameSampler::FrameSampler(const Circuit& c) {
  nq_ = c.num_qubits();
  uint32_t meas = 0;
  for (const auto& ins : c.instructions) {
    switch (ins.op) {
      case Op::Tick:
      case Op::QubitCoords:
        break;
      case Op::CNOT:
      case Op::CXSWAP:
      case Op::SWAPCX:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2)
          ops_.push_back({ins.op, ins.qubits[i], ins.qubits[i + 1]});
        break;
      case Op::H:
      case Op::R:
      case Op::RX:
        for (uint32_t q : ins.qubits) ops_.push_back({ins.op, q});
        break;
      case Op::MR:
      case Op::MRX:
        for (uint32_t q : ins.qubits) {
          FOp f{ins.op, q};
          f.rec = meas++;
          ops_.push_back(f);
        }
        break;
      case Op::Depolarize1:
      case Op::XError:
      case Op::ZError:
        for (uint32_t q : ins.qubits) {
          FOp f{ins.op, q};
          f.p = ins.args.at(0);
          if (f.p > 0) ops_.push_back(f);
        }
        break;
      case Op::Depolarize2:
        for (size_t i = 0; i + 1 < ins.qubits.size(); i += 2) {
          FOp f{ins.op, ins.qubits[i], ins.qubits[i + 1]};
          f.p = ins.args.at(0);
          if (f.p > 0) ops_.push_back(f);
        }
        break;
      case Op::Detector:
      case Op::ObservableInclude: {
        FOp f{ins.op};
        for (int32_t r : ins.rec) {
          int64_t idx = int64_t(meas) + r;
          if (idx < 0 || idx >= int64_t(meas))
            throw std::runtime_error("record offset out of range in sampler");
          f.recs.push_back(uint32_t(idx));
        }
        f.out_index = ins.op == Op::Detector ? num_dets_++ : uint32_t(ins.args.at(0));
        if (ins.op == Op::ObservableInclude)
          num_obs_ = std::max(num_obs_, uint32_t(ins.args.at(0)) + 1);
        ops_.push_back(f);
        break;
      }
    }
  }
  num_meas_ = meas;
}

void FrameSampler::sample_word(uint64_t seed, uint64_t word_index, uint64_t* det_words,
                               uint64_t* obs_words) const {
  std::vector<uint64_t> fx(nq_, 0), fz(nq_, 0), rec(num_meas_, 0);
  for (uint32_t i = 0; i < num_dets_; ++i) det_words[i] = 0;
  for (uint32_t i = 0; i < num_obs_; ++i) obs_words[i] = 0;
  uint64_t base_shot = word_index * 64;
  uint32_t channel = 0;
  for (const FOp& f : ops_) {
    switch (f.op) {
      case Op::CNOT: {
        fx[f.b] ^= fx[f.a];
        fz[f.a] ^= fz[f.b];
        break;
      }
      case Op::CXSWAP: {
        uint64_t nxa = fx[f.a] ^ fx[f.b], nxb = fx[f.a];
        uint64_t nza = fz[f.b], nzb = fz[f.a] ^ fz[f.b];
        fx[f.a] = nxa; fx[f.b] = nxb; fz[f.a] = nza; fz[f.b] = nzb;
        break;
      }
      case Op::SWAPCX: {
        uint64_t nxa = fx[f.b], nxb = fx[f.a] ^ fx[f.b];
        uint64_t nza = fz[f.a] ^ fz[f.b], nzb = fz[f.a];
        fx[f.a] = nxa; fx[f.b] = nxb; fz[f.a] = nza; fz[f.b] = nzb;
        break;
      }
      case Op::H:
        std::swap(fx[f.a], fz[f.a]);
        break;
      case Op::R:
      case Op::RX:
        fx[f.a] = fz[f.a] = 0;
        break;
      case Op::MR:
        rec[f.rec] = fx[f.a];
        fx[f.a] = fz[f.a] = 0;
        break;
      case Op::MRX:
        rec[f.rec] = fz[f.a];
        fx[f.a] = fz[f.a] = 0;
        break;
      case Op::XError:
      case Op::ZError:
      case Op::Depolarize1: {
        uint64_t mx = 0, mz = 0;
        for (int s = 0; s < 64; ++s) {
          uint64_t h = hash_combine(hash_combine(seed, base_shot + s), channel);
          if (u01(h) < f.p) {
            if (f.op == Op::XError) mx |= 1ULL << s;
            else if (f.op == Op::ZError) mz |= 1ULL << s;
            else {
              int which = 1 + int(splitmix64(h ^ 0x777) % 3);
              if (which & 1) mx |= 1ULL << s;
              if (which & 2) mz |= 1ULL << s;
            }
          }
        }
        fx[f.a] ^= mx;
        fz[f.a] ^= mz;
        ++channel;
        break;
      }
      case Op::Depolarize2: {
        uint64_t mxa = 0, mza = 0, mxb = 0, mzb = 0;
        for (int s = 0; s < 64; ++s) {
          uint64_t h = hash_combine(hash_combine(seed, base_shot + s), channel);
          if (u01(h) < f.p) {
            int which = 1 + int(splitmix64(h ^ 0x777) % 15);
            if (which & 1) mxa |= 1ULL << s;
            if (which & 2) mza |= 1ULL << s;
            if (which & 4) mxb |= 1ULL << s;
            if (which & 8) mzb |= 1ULL << s;
          }
        }
        fx[f.a] ^= mxa; fz[f.a] ^= mza; fx[f.b] ^= mxb; fz[f.b] ^= mzb;
        ++channel;
        break;
      }
      case Op::Detector: {
        uint64_t v = 0;
        for (uint32_t r : f.recs) v ^= rec[r];
        det_words[f.out_index] = v;
        break;
      }
      case Op::ObservableInclude: {
        uint64_t v = 0;
        for (uint32_t r : f.recs) v ^= rec[r];
        obs_words[f.out_index] ^= v;
        break;
      }
      default:
        break;
    }
  }
}

FrameSampler::Shots FrameSampler::sample(uint64_t seed, size_t shots) const {
  Shots out;
  out.shots = shots;
  out.num_dets = num_dets_;
  out.num_obs = num_obs_;
  size_t words = (shots + 63) / 64;
  out.det_words.assign(words * num_dets_, 0);
  out.obs_words.assign(words * std::max<uint32_t>(num_obs_, 1), 0);
  for (size_t w = 0; w < words; ++w)
    sample_word(seed, w, out.det_words.data() + w * num_dets_,
                out.obs_words.data() + w * std::max<uint32_t>(num_obs_, 1));
  return out;
}

std::string dets_text(const FrameSampler::Shots& s) {
  std::ostringstream out;
  for (size_t shot = 0; shot < s.shots; ++shot) {
    out << "shot";
    for (size_t d = 0; d < s.num_dets; ++d)
      if (s.det(shot, d)) out << " D" << d;
    for (size_t o = 0; o < s.num_obs; ++o)
      if (s.obs(shot, o)) out << " L" << o;
    out << "\n";
  }
  return out.str();
}

std::vector<uint8_t> dets_packed(const FrameSampler::Shots& s) {
  size_t bits = s.num_dets + s.num_obs;
  size_t stride = (bits + 7) / 8;
  std::vector<uint8_t> out(stride * s.shots, 0);
  for (size_t shot = 0; shot < s.shots; ++shot) {
    for (size_t d = 0; d < s.num_dets; ++d)
      if (s.det(shot, d)) out[shot * stride + d / 8] |= uint8_t(1u << (d % 8));
    for (size_t o = 0; o < s.num_obs; ++o) {
      size_t bit = s.num_dets + o;
      if (s.obs(shot, o)) out[shot * stride + bit / 8] |= uint8_t(1u << (bit % 8));
    }
  }
  return out;
}

}  // namespace dsc
