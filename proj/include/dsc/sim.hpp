#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsc/circuit.hpp"
#include "dsc/util.hpp"

namespace dsc {

// Two-qubit Pauli without sign, one x/z bit pair per qubit.
struct PauliPair {
  bool x1 = false, z1 = false, x2 = false, z2 = false;
  friend bool operator==(const PauliPair&, const PauliPair&) = default;
  std::string str() const;
};

// Heisenberg-picture image of a Pauli under a gate (sign dropped).
PauliPair conjugate(Op gate, const PauliPair& p);

// Exact stabilizer simulation. Measurement outcomes are tracked as affine
// GF(2) functions of "coin" variables introduced by non-deterministic
// measurements, so the determinism of any parity of outcomes is exact.
class TableauSim {
 public:
  struct Expr {
    bool c0 = false;
    std::vector<uint32_t> coins;  // sorted
    bool deterministic() const { return coins.empty(); }
    void operator^=(const Expr& o) {
      c0 ^= o.c0;
      xor_into(coins, o.coins);
    }
  };

  explicit TableauSim(int n);
  void h(int q);
  void cnot(int c, int t);
  void swap_qubits(int a, int b);
  void cxswap(int c, int t);
  void swapcx(int c, int t);
  void pauli_x(int q);
  void pauli_z(int q);
  Expr measure_z(int q);  // no reset
  Expr mr(int q);         // measure Z, reset |0>
  Expr mrx(int q);        // measure X, reset |+>
  void reset_z(int q);
  void reset_x(int q);

 private:
  int n_;
  uint32_t coin_count_ = 0;
  std::vector<BitRow> x_, z_;  // 2n rows
  std::vector<Expr> r_;
  void rowsum(int h, int i);
  void x_if(int q, const Expr& e);
};

struct DetectorReport {
  bool deterministic = false;
  bool value = false;  // meaningful when deterministic
};

struct TableauRunResult {
  std::vector<DetectorReport> detectors;
  std::vector<DetectorReport> observables;
  std::vector<TableauSim::Expr> measurements;
  bool all_detectors_deterministic() const;
  bool all_deterministic_zero() const;
};

// Noise channels are skipped (treated as identity).
TableauRunResult tableau_run(const Circuit& c);

// Reference noisy sampler: exact tableau simulation with Pauli errors drawn
// from the noise channels. Slow; used to cross-check the frame sampler.
std::vector<uint8_t> tableau_sample_detectors(const Circuit& c, uint64_t seed, uint64_t shot);

// High-throughput Pauli-frame sampler, 64 shots per word.
class FrameSampler {
 public:
  explicit FrameSampler(const Circuit& c);
  size_t num_detectors() const { return size_t(num_dets_); }
  size_t num_observables() const { return size_t(num_obs_); }
  // det_words: num_detectors() entries; obs_words: num_observables() entries.
  // Bit s of each word is shot word_index*64+s.
  void sample_word(uint64_t seed, uint64_t word_index, uint64_t* det_words,
                   uint64_t* obs_words) const;

  struct Shots {
    size_t shots = 0;
    size_t num_dets = 0, num_obs = 0;
    std::vector<uint64_t> det_words;  // [word][det]
    std::vector<uint64_t> obs_words;  // [word][obs]
    bool det(size_t shot, size_t d) const {
      return (det_words[(shot / 64) * num_dets + d] >> (shot % 64)) & 1;
    }
    bool obs(size_t shot, size_t o) const {
      return (obs_words[(shot / 64) * num_obs + o] >> (shot % 64)) & 1;
    }
  };
  Shots sample(uint64_t seed, size_t shots) const;

 private:
  struct FOp {
    Op op;
    uint32_t a = 0, b = 0;
    uint32_t rec = 0;
    double p = 0;
    std::vector<uint32_t> recs;  // absolute indices for detectors/observables
    uint32_t out_index = 0;
  };
  uint32_t nq_ = 0, num_meas_ = 0, num_dets_ = 0, num_obs_ = 0;
  std::vector<FOp> ops_;
};

std::string dets_text(const FrameSampler::Shots& s);
std::vector<uint8_t> dets_packed(const FrameSampler::Shots& s);

}  // namespace dsc
