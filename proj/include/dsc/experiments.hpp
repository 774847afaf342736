#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dsc/compile.hpp"
#include "dsc/lattice.hpp"
#include "dsc/noise.hpp"
#include "dsc/strategy.hpp"

namespace dsc {

// P_shot to a per-round rate; the identity 1-2p_shot = (1-2p_round)^R fixes
// the conversion.
double per_round_rate(double p_shot, int rounds);

struct MemoryResult {
  size_t shots = 0;
  size_t failures = 0;
  double p_shot = 0;
  double p_round = 0;
};

MemoryResult memory_experiment(const DeformedLattice& dl,
                               const std::vector<HalmaAssignment>& halma, int rounds,
                               Basis basis, const NoiseBudget& budget, size_t shots,
                               uint64_t seed, bool perfect_init_final = true);

struct StabilityResult {
  size_t shots = 0;
  size_t failures = 0;
  double p_shot = 0;
};

StabilityResult stability_experiment(const DeformedLattice& dl,
                                     const std::vector<HalmaAssignment>& halma, int rounds,
                                     const NoiseBudget& budget, size_t shots, uint64_t seed);

struct SweepConfig {
  std::vector<int> distances{5, 7, 9};
  double rate = 0.02;
  std::vector<double> p2s{1e-3};
  int lattices = 50;
  int shots = 2000;
  int rounds = 0;  // 0: d rounds
  Basis basis = Basis::Z;
  uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  std::vector<std::string> modes{"defect_free", "halma_baseline", "halma_postselected",
                                 "superstabilizer"};
};

struct CellResult {
  int d = 0;
  double p2 = 0;
  std::string mode;
  int lattices_used = 0;
  int shots = 0;
  double p_round_mean = 0;
  double p_round_std = 0;   // std of the 10 group means
  double discard_rate = 0;  // post-selection discards / degenerate exclusions
  std::vector<double> per_lattice;  // per-round rates, one per usable lattice
};

std::vector<CellResult> monte_carlo_sweep(const SweepConfig& config);

std::string results_csv(const std::vector<CellResult>& rows);
std::vector<CellResult> results_from_csv(const std::string& text);

struct FitResult {
  double a = 0, b = 0;
  double var_a = 0, var_b = 0;
  std::vector<int> distances;
};

// Least-squares fit of ln(p_round) = a d + b.
FitResult fit_exponential(const std::vector<std::pair<int, double>>& points);

struct Footprint {
  bool valid = false;
  int d_star = 0;
  long qubits = 0;
  FitResult fit;
};

// Smallest distance whose fitted block error rate reaches the target; the
// block spans block_rounds_per_d*d rounds and costs 2d^2-1 qubits.
Footprint teraquop_footprint(const FitResult& fit, double target, int block_rounds_per_d);

std::string footprint_csv_header();
std::string footprint_csv_row(double p2, const std::string& mode, const Footprint& f);

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

}  // namespace dsc
