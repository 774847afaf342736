// Command-line front end: lattice generation, strategy planning, circuit
// emission, verification, sampling, Monte Carlo sweeps and footprint fits.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dsc/compile.hpp"
#include "dsc/decode.hpp"
#include "dsc/experiments.hpp"
#include "dsc/lattice.hpp"
#include "dsc/noise.hpp"
#include "dsc/schedule.hpp"
#include "dsc/sim.hpp"
#include "dsc/strategy.hpp"
#include "dsc/util.hpp"
#include "json.hpp"

using namespace dsc;

namespace {

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << text;
}

struct PlanFile {
  DeformedLattice lattice;
  Strategy strategy;
  std::vector<GlobalRoundPlan> plan;
  Basis basis = Basis::Z;
  bool stability = false;
};

std::string plan_file_json(const PlanFile& pf) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(lattice_json(pf.lattice));
  j["basis"] = pf.basis == Basis::X ? "X" : "Z";
  j["stability"] = pf.stability;
  j["mode"] = pf.strategy.all_routed() || !pf.strategy.ancilla_method.empty()
                  ? (pf.strategy.assignments.empty() &&
                             !pf.strategy.ancilla_method.empty()
                         ? "superstabilizer"
                         : "halma_baseline")
                  : "halma_baseline";
  j["strategy"] = nlohmann::ordered_json::parse(strategy_json(pf.strategy));
  j["plan"] = nlohmann::ordered_json::parse(plan_json(pf.plan))["rounds"];
  return j.dump(2) + "\n";
}

PlanFile plan_file_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  PlanFile pf;
  pf.basis = j.value("basis", "Z") == "X" ? Basis::X : Basis::Z;
  pf.stability = j.value("stability", false);
  std::string mode = j.value("mode", "halma_baseline");

  Lattice lat = build_lattice(j.at("d").get<int>());
  DefectSet defs;
  defs.seed = j.at("seed").get<uint64_t>();
  defs.rate = j.at("rate").get<double>();
  for (const auto& c : j.at("defective_qubits")) defs.qubits.push_back({c[0], c[1]});
  StrategyResult sr = mode == "superstabilizer" ? superstab_strategy(lat, defs)
                                                : baseline_strategy(lat, defs);
  pf.lattice = sr.lattice;
  pf.strategy = sr.strategy;
  nlohmann::json wrap;
  wrap["rounds"] = j.at("plan");
  pf.plan = plan_from_json(wrap.dump());
  return pf;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"defect-aware surface-code compiler and simulator"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file with default option values");

  auto* gen = app.add_subcommand("gen", "sample defects and deform a lattice");
  int gen_d = 5;
  double gen_rate = 0.02;
  uint64_t gen_seed = 1;
  bool gen_no_halma = false;
  std::string gen_out;
  gen->add_option("--distance", gen_d, "code distance");
  gen->add_option("--rate", gen_rate, "qubit defect rate");
  gen->add_option("--seed", gen_seed, "sampling seed");
  gen->add_flag("--no-halma-aware", gen_no_halma, "deform without routed boundary handling");
  gen->add_option("--out", gen_out, "output path (default stdout)");

  auto* plan = app.add_subcommand("plan", "choose a strategy and build the round plan");
  std::string plan_in, plan_out, plan_mode = "halma_baseline", plan_basis = "Z";
  int plan_rounds = 0;
  bool plan_stability = false;
  plan->add_option("--in", plan_in, "lattice JSON (default stdin)");
  plan->add_option("--rounds", plan_rounds, "number of rounds (default: distance)");
  plan->add_option("--mode", plan_mode, "halma_baseline | superstabilizer");
  plan->add_option("--basis", plan_basis, "memory basis X|Z");
  plan->add_flag("--stability", plan_stability, "plan a stability run");
  plan->add_option("--out", plan_out, "output path");

  auto* emit = app.add_subcommand("emit", "lower a plan to circuit text");
  std::string emit_in, emit_out, emit_budget;
  double emit_p2 = 0;
  emit->add_option("--plan", emit_in, "plan JSON (default stdin)");
  emit->add_option("--p2", emit_p2, "two-qubit error rate (0: noiseless)");
  emit->add_option("--budget", emit_budget, "noise budget JSON file");
  emit->add_option("--out", emit_out, "output path");

  auto* verify = app.add_subcommand("verify", "determinism and distance report");
  std::string verify_in;
  int verify_cap = 8;
  double verify_p2 = 1e-3;
  verify->add_option("--circuit", verify_in, "circuit text (default stdin)");
  verify->add_option("--cap", verify_cap, "distance search cap");
  verify->add_option("--p2", verify_p2, "noise used to build the search graph");

  auto* sample = app.add_subcommand("sample", "sample detector outcomes");
  std::string sample_in, sample_out, sample_format = "dets";
  uint64_t sample_seed = 1;
  size_t sample_shots = 1000;
  sample->add_option("--circuit", sample_in, "noisy circuit text (default stdin)");
  sample->add_option("--shots", sample_shots, "number of shots");
  sample->add_option("--seed", sample_seed, "sampler seed");
  sample->add_option("--format", sample_format, "dets | b8");
  sample->add_option("--out", sample_out, "output path");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over defective lattices");
  SweepConfig sc;
  std::string sweep_out, sweep_modes, sweep_dists = "5,7,9", sweep_p2s = "1e-3";
  bool sweep_applicability = false;
  int sweep_trials = 2000;
  sweep->add_option("--distances", sweep_dists, "comma-separated distances");
  sweep->add_option("--rate", sc.rate, "defect rate");
  sweep->add_option("--p2", sweep_p2s, "comma-separated two-qubit error rates");
  sweep->add_option("--lattices", sc.lattices, "lattices per distance");
  sweep->add_option("--shots", sc.shots, "shots per lattice");
  sweep->add_option("--rounds", sc.rounds, "rounds (default: distance)");
  sweep->add_option("--seed", sc.seed, "seed");
  sweep->add_option("--threads", sc.threads, "worker threads (default: cores)");
  sweep->add_option("--modes", sweep_modes, "comma-separated mode list");
  sweep->add_flag("--applicability", sweep_applicability,
                  "emit routing applicability statistics instead of error rates");
  sweep->add_option("--trials", sweep_trials, "lattice samples for --applicability");
  sweep->add_option("--out", sweep_out, "output CSV path");

  auto* fit = app.add_subcommand("fit", "fit sweep results and project footprints");
  std::string fit_in, fit_out;
  double fit_target = 1e-12;
  fit->add_option("--in", fit_in, "results CSV (default stdin)");
  fit->add_option("--target", fit_target, "target block error rate");
  fit->add_option("--out", fit_out, "output CSV path");

  // config file merging: CLI > file > defaults
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  if (!config_path.empty()) {
    auto j = nlohmann::json::parse(read_input(config_path));
    if (j.contains("distance")) gen_d = j["distance"].get<int>();
    if (j.contains("rate")) { gen_rate = j["rate"].get<double>(); sc.rate = gen_rate; }
    if (j.contains("seed")) { gen_seed = j["seed"].get<uint64_t>(); sc.seed = gen_seed; }
    if (j.contains("lattices")) sc.lattices = j["lattices"].get<int>();
    if (j.contains("shots")) sc.shots = j["shots"].get<int>();
    if (j.contains("threads")) sc.threads = j["threads"].get<int>();
  }

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    Lattice lat = build_lattice(gen_d);
    DefectSet defs = sample_defects(lat, gen_rate, gen_seed);
    DeformedLattice dl = deform_boundary(lat, defs, !gen_no_halma);
    write_output(gen_out, lattice_json(dl));
    return 0;
  }

  if (plan->parsed()) {
    auto j = nlohmann::json::parse(read_input(plan_in));
    Lattice lat = build_lattice(j.at("d").get<int>());
    DefectSet defs;
    defs.seed = j.at("seed").get<uint64_t>();
    defs.rate = j.at("rate").get<double>();
    for (const auto& c : j.at("defective_qubits")) defs.qubits.push_back({c[0], c[1]});
    StrategyResult sr = plan_mode == "superstabilizer" ? superstab_strategy(lat, defs)
                                                       : baseline_strategy(lat, defs);
    if (sr.lattice.degenerate) {
      std::cerr << "degenerate lattice after deformation\n";
      return 1;
    }
    PlanFile pf;
    pf.lattice = sr.lattice;
    pf.strategy = sr.strategy;
    int rounds = plan_rounds > 0 ? plan_rounds : j.at("d").get<int>();
    pf.plan = xxzz_cycle(sr.strategy.assignments, rounds);
    check_no_routing_overlap(pf.lattice, sr.strategy.assignments, pf.plan);
    pf.basis = plan_basis == "X" ? Basis::X : Basis::Z;
    pf.stability = plan_stability;
    std::string out = plan_file_json(pf);
    // record the chosen mode for the emitter
    auto jj = nlohmann::ordered_json::parse(out);
    jj["mode"] = plan_mode;
    write_output(plan_out, jj.dump(2) + "\n");
    return 0;
  }

  if (emit->parsed()) {
    PlanFile pf = plan_file_from_json(read_input(emit_in));
    ExperimentSpec spec;
    spec.lattice = &pf.lattice;
    spec.halma = pf.strategy.assignments;
    spec.plan = pf.plan;
    spec.memory_basis = pf.basis;
    spec.stability = pf.stability;
    Circuit c = lower(spec);
    if (!emit_budget.empty()) {
      c = apply_noise(c, NoiseBudget::from_json(read_input(emit_budget)));
    } else if (emit_p2 > 0) {
      c = apply_noise(c, NoiseBudget::from_p2(emit_p2));
    }
    write_output(emit_out, export_text(c));
    return 0;
  }

  if (verify->parsed()) {
    Circuit c = import_text(read_input(verify_in));
    auto result = tableau_run(c);
    size_t bad = 0;
    for (const auto& d : result.detectors)
      if (!d.deterministic || d.value) ++bad;
    for (const auto& o : result.observables)
      if (!o.deterministic || o.value) ++bad;
    bool deterministic = bad == 0;
    Circuit noisy = c;
    if (noisy.count_op(Op::Depolarize2) == 0)
      noisy = apply_noise(c, NoiseBudget::from_p2(verify_p2));
    auto mw = min_weight_logical(extract_dem(noisy), verify_cap);
    std::printf("deterministic: %s (%zu detectors, %zu nondeterministic)\n",
                deterministic ? "yes" : "no", result.detectors.size(), bad);
    if (mw.found) std::printf("spacelike distance: %d\n", mw.weight);
    else std::printf("spacelike distance: >= %d\n", verify_cap + 1);
    return deterministic ? 0 : 2;
  }

  if (sample->parsed()) {
    Circuit c = import_text(read_input(sample_in));
    FrameSampler fs(c);
    auto shots = fs.sample(sample_seed, sample_shots);
    if (sample_format == "b8") {
      auto bytes = dets_packed(shots);
      write_output(sample_out, std::string(bytes.begin(), bytes.end()));
    } else {
      write_output(sample_out, dets_text(shots));
    }
    return 0;
  }

  if (sweep->parsed()) {
    sc.distances.clear();
    for (auto& tok : split(sweep_dists, ',')) sc.distances.push_back(std::stoi(trim(tok)));
    if (sweep_applicability) {
      std::string out = "d,r,mode,fraction,stderr\n";
      char buf[160];
      for (int d : sc.distances) {
        auto stats = applicability_stats(d, sc.rate, sweep_trials, sc.seed);
        double n = double(std::max<size_t>(1, stats.defects));
        auto se = [&](double p) { return std::sqrt(p * (1 - p) / n); };
        std::snprintf(buf, sizeof buf, "%d,%.9g,single_order,%.6f,%.6f\n", d, sc.rate,
                      stats.single_order, se(stats.single_order));
        out += buf;
        std::snprintf(buf, sizeof buf, "%d,%.9g,any_order,%.6f,%.6f\n", d, sc.rate,
                      stats.any_order, se(stats.any_order));
        out += buf;
      }
      write_output(sweep_out, out);
      return 0;
    }
    sc.p2s.clear();
    for (auto& tok : split(sweep_p2s, ',')) sc.p2s.push_back(std::stod(trim(tok)));
    if (!sweep_modes.empty()) {
      sc.modes.clear();
      for (auto& tok : split(sweep_modes, ',')) sc.modes.push_back(trim(tok));
    }
    auto rows = monte_carlo_sweep(sc);
    write_output(sweep_out, results_csv(rows));
    return 0;
  }

  if (fit->parsed()) {
    auto rows = results_from_csv(read_input(fit_in));
    std::map<std::pair<double, std::string>, std::vector<std::pair<int, double>>> series;
    for (const auto& r : rows) series[{r.p2, r.mode}].push_back({r.d, r.p_round_mean});
    std::string out = footprint_csv_header();
    for (const auto& [key, pts] : series) {
      FitResult f = fit_exponential(pts);
      int block = key.second == "defect_free" ? 1 : 2;
      Footprint fp = teraquop_footprint(f, fit_target, block);
      out += footprint_csv_row(key.first, key.second, fp);
    }
    write_output(fit_out, out);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
