#include "dsc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dsc/decode.hpp"
#include "dsc/sim.hpp"
#include "dsc/util.hpp"

namespace dsc {

double per_round_rate(double p_shot, int rounds) {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  p_shot = std::min(std::max(p_shot, 0.0), 0.5);
  return 0.5 * (1.0 - std::pow(1.0 - 2.0 * p_shot, 1.0 / double(rounds)));
}

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 0) threads = int(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, int(n)));
  if (threads == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

namespace {

struct DecodedRun {
  size_t shots = 0;
  size_t failures = 0;
};

DecodedRun run_and_decode(const Circuit& noisy, size_t shots, uint64_t seed) {
  FrameSampler sampler(noisy);
  Dem dem = extract_dem(noisy);
  MatchingGraph graph = build_graph(dem);
  UfDecoder dec(graph);
  size_t nd = sampler.num_detectors();
  size_t no = std::max<size_t>(1, sampler.num_observables());
  std::vector<uint64_t> det_words(nd), obs_words(no);
  std::vector<uint8_t> syndrome(nd);
  DecodedRun out;
  out.shots = shots;
  size_t words = (shots + 63) / 64;
  for (size_t w = 0; w < words; ++w) {
    sampler.sample_word(seed, w, det_words.data(), obs_words.data());
    size_t lo = w * 64, hi = std::min(shots, lo + 64);
    for (size_t s = lo; s < hi; ++s) {
      int bit = int(s - lo);
      bool any = false;
      for (size_t d = 0; d < nd; ++d) {
        syndrome[d] = (det_words[d] >> bit) & 1;
        any |= syndrome[d];
      }
      uint32_t actual = 0;
      for (size_t o = 0; o < sampler.num_observables(); ++o)
        if ((obs_words[o] >> bit) & 1) actual |= 1u << o;
      uint32_t predicted = any ? dec.decode(syndrome) : 0;
      if (predicted != actual) ++out.failures;
    }
  }
  return out;
}

}  // namespace

MemoryResult memory_experiment(const DeformedLattice& dl,
                               const std::vector<HalmaAssignment>& halma, int rounds,
                               Basis basis, const NoiseBudget& budget, size_t shots,
                               uint64_t seed, bool perfect_init_final) {
  if (dl.degenerate) throw std::runtime_error("degenerate patch");
  ExperimentSpec spec;
  spec.lattice = &dl;
  spec.halma = halma;
  spec.plan = xxzz_cycle(halma, rounds);
  spec.memory_basis = basis;
  Circuit clean = lower(spec);
  Circuit noisy = apply_noise(clean, budget, perfect_init_final);
  DecodedRun run = run_and_decode(noisy, shots, seed);
  MemoryResult out;
  out.shots = run.shots;
  out.failures = run.failures;
  out.p_shot = double(run.failures) / double(std::max<size_t>(1, run.shots));
  out.p_round = per_round_rate(out.p_shot, rounds);
  return out;
}

StabilityResult stability_experiment(const DeformedLattice& dl,
                                     const std::vector<HalmaAssignment>& halma, int rounds,
                                     const NoiseBudget& budget, size_t shots, uint64_t seed) {
  if (dl.degenerate) throw std::runtime_error("degenerate patch");
  ExperimentSpec spec;
  spec.lattice = &dl;
  spec.halma = halma;
  spec.plan = xxzz_cycle(halma, rounds);
  spec.stability = true;
  Circuit clean = lower(spec);
  Circuit noisy = apply_noise(clean, budget, true);
  DecodedRun run = run_and_decode(noisy, shots, seed);
  StabilityResult out;
  out.shots = run.shots;
  out.failures = run.failures;
  out.p_shot = double(run.failures) / double(std::max<size_t>(1, run.shots));
  return out;
}

namespace {

struct LatticeTask {
  DeformedLattice lattice;
  std::vector<HalmaAssignment> halma;
  bool usable = false;
};

double group_mean_std(const std::vector<double>& xs, double* mean_out) {
  // mean of 10 equal groups, std of the group means
  size_t groups = std::min<size_t>(10, xs.size());
  std::vector<double> means;
  if (groups == 0) {
    *mean_out = 0;
    return 0;
  }
  size_t per = xs.size() / groups;
  for (size_t g = 0; g < groups; ++g) {
    double s = 0;
    size_t lo = g * per, hi = g + 1 == groups ? xs.size() : lo + per;
    for (size_t i = lo; i < hi; ++i) s += xs[i];
    means.push_back(s / double(hi - lo));
  }
  double m = 0;
  for (double v : means) m += v;
  m /= double(means.size());
  double var = 0;
  for (double v : means) var += (v - m) * (v - m);
  var /= double(std::max<size_t>(1, means.size() - 1));
  *mean_out = m;
  return std::sqrt(var);
}

}  // namespace

std::vector<CellResult> monte_carlo_sweep(const SweepConfig& config) {
  std::vector<CellResult> rows;
  std::mutex mu;
  for (int d : config.distances) {
    Lattice lat = build_lattice(d);
    int rounds = config.rounds > 0 ? config.rounds : d;

    // Pre-generate defect distributions; superstabilizer and baseline arms
    // share them so the comparison is paired.
    std::vector<DefectSet> paired(config.lattices);
    for (int i = 0; i < config.lattices; ++i)
      paired[i] = sample_defects(lat, config.rate,
                                 hash_combine(hash_combine(config.seed, uint64_t(d)), uint64_t(i)));

    for (const std::string& mode : config.modes) {
      // build the per-lattice tasks (post-selection resamples)
      std::vector<LatticeTask> tasks(config.lattices);
      size_t discarded = 0;
      for (int i = 0; i < config.lattices; ++i) {
        LatticeTask& task = tasks[i];
        if (mode == "defect_free") {
          DefectSet none;
          none.rate = 0;
          none.seed = 0;
          StrategyResult r = baseline_strategy(lat, none);
          task = {r.lattice, r.strategy.assignments, !r.lattice.degenerate};
        } else if (mode == "halma_baseline") {
          StrategyResult r = baseline_strategy(lat, paired[i]);
          task = {r.lattice, r.strategy.assignments, !r.lattice.degenerate};
        } else if (mode == "superstabilizer") {
          StrategyResult r = superstab_strategy(lat, paired[i]);
          task = {r.lattice, r.strategy.assignments, !r.lattice.degenerate};
        } else if (mode == "halma_postselected") {
          uint64_t attempt = 0;
          while (true) {
            DefectSet defs = sample_defects(
                lat, config.rate,
                hash_combine(hash_combine(hash_combine(config.seed, uint64_t(d)), uint64_t(i)),
                             0xB00 + attempt));
            StrategyResult r = baseline_strategy(lat, defs);
            if (post_select(r)) {
              task = {r.lattice, r.strategy.assignments, true};
              break;
            }
            ++discarded;
            ++attempt;
            if (attempt > 100000) throw std::runtime_error("post-selection never accepts");
          }
        } else {
          throw std::invalid_argument("unknown sweep mode: " + mode);
        }
        if (task.lattice.degenerate) task.usable = false;
      }
      size_t degenerate_cnt = 0;
      for (auto& t : tasks)
        if (!t.usable) ++degenerate_cnt;

      for (double p2 : config.p2s) {
        NoiseBudget budget = NoiseBudget::from_p2(p2);
        std::vector<double> per_lattice(tasks.size(), -1);
        parallel_for(tasks.size(), config.threads, [&](size_t i) {
          if (!tasks[i].usable) return;
          uint64_t seed = hash_combine(
              hash_combine(hash_combine(config.seed, uint64_t(d)), uint64_t(i * 977)),
              uint64_t(p2 * 1e9) ^ std::hash<std::string>()(mode));
          MemoryResult r = memory_experiment(tasks[i].lattice, tasks[i].halma, rounds,
                                             config.basis, budget, size_t(config.shots), seed);
          per_lattice[i] = r.p_round;
        });
        CellResult row;
        row.d = d;
        row.p2 = p2;
        row.mode = mode;
        row.shots = config.shots;
        for (double v : per_lattice)
          if (v >= 0) row.per_lattice.push_back(v);
        row.lattices_used = int(row.per_lattice.size());
        row.p_round_std = group_mean_std(row.per_lattice, &row.p_round_mean);
        if (mode == "halma_postselected")
          row.discard_rate = double(discarded) / double(discarded + config.lattices);
        else
          row.discard_rate = double(degenerate_cnt) / double(std::max(1, config.lattices));
        std::lock_guard<std::mutex> lock(mu);
        rows.push_back(std::move(row));
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const CellResult& a, const CellResult& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.p2 != b.p2) return a.p2 < b.p2;
    return a.mode < b.mode;
  });
  return rows;
}

std::string results_csv(const std::vector<CellResult>& rows) {
  std::ostringstream out;
  out << "d,p2,mode,lattices,shots,p_round_mean,p_round_std,discard_rate\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%s,%d,%d,%.9g,%.9g,%.9g\n", r.d, r.p2,
                  r.mode.c_str(), r.lattices_used, r.shots, r.p_round_mean, r.p_round_std,
                  r.discard_rate);
    out << buf;
  }
  return out.str();
}

std::vector<CellResult> results_from_csv(const std::string& text) {
  std::vector<CellResult> rows;
  bool first = true;
  for (const std::string& raw : split(text, '\n')) {
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;
    }
    auto f = split(line, ',');
    if (f.size() < 8) throw std::runtime_error("bad results row: " + line);
    CellResult r;
    r.d = std::stoi(f[0]);
    r.p2 = std::stod(f[1]);
    r.mode = f[2];
    r.lattices_used = std::stoi(f[3]);
    r.shots = std::stoi(f[4]);
    r.p_round_mean = std::stod(f[5]);
    r.p_round_std = std::stod(f[6]);
    r.discard_rate = std::stod(f[7]);
    rows.push_back(r);
  }
  return rows;
}

FitResult fit_exponential(const std::vector<std::pair<int, double>>& points) {
  std::vector<std::pair<double, double>> pts;
  for (auto& [d, p] : points)
    if (p > 0) pts.push_back({double(d), std::log(p)});
  if (pts.size() < 3) throw std::invalid_argument("fit needs at least 3 distances with p > 0");
  double n = double(pts.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  FitResult fit;
  fit.a = (n * sxy - sx * sy) / denom;
  fit.b = (sy * sxx - sx * sxy) / denom;
  double sse = 0;
  for (auto& [x, y] : pts) {
    double e = y - (fit.a * x + fit.b);
    sse += e * e;
  }
  double sigma2 = pts.size() > 2 ? sse / (n - 2) : 0;
  fit.var_a = sigma2 * n / denom;
  fit.var_b = sigma2 * sxx / denom;
  for (auto& [d, p] : points) fit.distances.push_back(d);
  return fit;
}

Footprint teraquop_footprint(const FitResult& fit, double target, int block_rounds_per_d) {
  Footprint out;
  out.fit = fit;
  if (fit.a >= 0)
    throw std::runtime_error("refusing to extrapolate: fitted rate does not decay with distance");
  for (int d = 2; d <= 4000; ++d) {
    double p_round = std::exp(fit.a * d + fit.b);
    double rounds = double(block_rounds_per_d) * d;
    double p_block = 1.0 - std::pow(1.0 - std::min(p_round, 0.5), rounds);
    if (p_block <= target) {
      out.valid = true;
      out.d_star = d;
      out.qubits = 2L * d * d - 1;
      return out;
    }
  }
  return out;
}

std::string footprint_csv_header() { return "p2,mode,a,b,d_star,qubits\n"; }

std::string footprint_csv_row(double p2, const std::string& mode, const Footprint& f) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.9g,%s,%.6g,%.6g,%d,%ld\n", p2, mode.c_str(), f.fit.a,
                f.fit.b, f.d_star, f.qubits);
  return buf;
}

}  // namespace dsc
