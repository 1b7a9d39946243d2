/*
 * Copyright 2026 The edgedem Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
// usage: acceptance <desk-config> <swap-reference> <cli> <work-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "edgedem/alloc.hpp"
#include "edgedem/config.hpp"
#include "edgedem/demlearn.hpp"
#include "edgedem/experiment.hpp"
#include "edgedem/latency.hpp"
#include "edgedem/matching.hpp"
#include "edgedem/radio.hpp"
#include "edgedem/stats.hpp"
#include "edgedem/units.hpp"
#include "oracles.hpp"

using namespace edgedem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

matching::MatchingContext instance(int n, int s, std::uint64_t seed, std::vector<int> quotas = {}) {
  const ExperimentConfig cfg = ConfigDocument().build();
  auto net = radio::generate_topology(cfg.radio, n, s, seed);
  auto profiles = latency::generate_profiles(cfg.compute, n, seed);
  return matching::make_context(net, cfg.radio, profiles, cfg.budget, std::move(quotas), cfg.alloc);
}

// 1. Exhaustive rescan after convergence finds no blocking proposal.
Outcome stability() {
  auto t0 = std::chrono::steady_clock::now();
  int blocking = 0, total_swaps = 0, with_virtual = 0;
  for (std::uint64_t i = 1; i <= 200; ++i) {
    const int n = 2 + static_cast<int>(i % 5), s = 1 + static_cast<int>(i % 3);
    Rng rng = Rng::derive(i, Stream::kTopology, 99);
    std::vector<int> quotas;
    for (int k = 0; k < s; ++k) quotas.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
    auto ctx = instance(n, s, i, quotas);
    auto r = matching::run_matching(ctx);
    total_swaps += r.stats.swaps;
    if (r.evaluation.matching.load(kVirtualNode) > 0) ++with_virtual;
    blocking += oracle::count_blocking(ctx, r.evaluation.matching.assignment);
  }
  double secs = elapsed(t0);
  return {blocking == 0 && secs < 30.0,
          fmt("200 instances, %d blocking proposals after convergence, %d swaps, %d with virtual-node UEs, %.1f s",
              blocking, total_swaps, with_virtual, secs)};
}

// 2. Gap to the exhaustive optimum.
Outcome optimality_gap() {
  auto t0 = std::chrono::steady_clock::now();
  double sum = 0.0, worst = 0.0;
  int worst_seed = 0, over = 0;
  for (int i = 1; i <= 50; ++i) {
    const int n = 4 + (i - 1) % 5;
    auto ctx = instance(n, 3, static_cast<std::uint64_t>(i));
    double prop = matching::run_matching(ctx).evaluation.system_delay_s;
    double opt = matching::evaluate(ctx, matching::baseline_optimal(ctx)).system_delay_s;
    double gap = (prop - opt) / opt;
    sum += gap;
    if (gap > 0.05) ++over;
    if (gap > worst) {
      worst = gap;
      worst_seed = i;
    }
  }
  double mean = sum / 50.0, secs = elapsed(t0);
  return {worst <= 0.05 && mean <= 0.03 && secs < 120.0,
          fmt("50 instances N=4..8 S=3: mean gap %.2f%% (limit 3%%), max %.2f%% at seed %d (limit 5%%), "
              "%d over 5%%, %.1f s",
              100 * mean, 100 * worst, worst_seed, over, secs)};
}

double mean_delay(ExperimentConfig cfg, MatchingScheme scheme) {
  cfg.matching.scheme = scheme;
  auto result = experiment::run_experiment(cfg);
  std::vector<double> all;
  for (const auto& rep : result.replications) {
    if (rep.error) throw Error(*rep.error, rep.error_message);
    for (const auto& r : rep.rounds) all.push_back(r.system_delay_ms);
  }
  return stats::mean(all);
}

// 3. Proposal against Random and Uniform at N=50, S=5.
Outcome dominance() {
  auto t0 = std::chrono::steady_clock::now();
  auto cfg = ConfigDocument::from_text(R"({"train": {"scheme": "none", "rounds": 3},
                                           "experiment": {"replications": 30}})")
                 .build();
  double prop = mean_delay(cfg, MatchingScheme::kProposal);
  double rnd = mean_delay(cfg, MatchingScheme::kRandom);
  double uni = mean_delay(cfg, MatchingScheme::kUniform);
  double g_rnd = 1.0 - prop / rnd, g_uni = 1.0 - prop / uni, secs = elapsed(t0);
  return {g_rnd >= 0.2 && g_uni >= 0.2 && secs < 180.0,
          fmt("30 replications: proposal %.0f ms, random %.0f ms (%.1f%% lower), uniform %.0f ms (%.1f%% lower), "
              "%.1f s",
              prop, rnd, 100 * g_rnd, uni, 100 * g_uni, secs)};
}

// 4. Bandwidth split against the best point of the 1e-3 simplex grid. The
// fine-lattice gap is reported alongside to separate solver error from grid
// resolution.
Outcome allocation() {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0, worst_fine = 0.0;
  int worst_seed = 0, over = 0, kkt_fail = 0, below_grid = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const int n = 2 + static_cast<int>(seed % 4);
    auto ctx = instance(n, 3, seed);
    alloc::AllocProblem p;
    p.global_iters = ctx.global_iters;
    for (int u = 0; u < n; ++u) {
      auto ui = static_cast<std::size_t>(u);
      p.ues.push_back(u);
      p.bits.push_back(ctx.bits[ui]);
      p.rate_coeff.push_back(ctx.rate_coeff(ui, 0));
      p.comp_time_s.push_back(ctx.comp_time_s[ui]);
      p.cpu_freq_hz.push_back(ctx.cpu_freq_hz[ui]);
    }
    auto sol = alloc::solve_beta(p, ctx.solver);
    if (!alloc::verify_kkt(p, sol)) ++kkt_fail;
    double grid = oracle::lattice_minmax(p, 1e-3);
    double fine = oracle::lattice_minmax(p, 1e-7);
    worst_fine = std::max(worst_fine, std::abs(sol.objective_s - fine) / fine);
    double rel = std::abs(sol.objective_s - grid) / grid;
    if (sol.objective_s <= grid) ++below_grid;
    if (rel > 1e-3) ++over;
    if (rel > worst) {
      worst = rel;
      worst_seed = static_cast<int>(seed);
    }
  }
  double secs = elapsed(t0);
  return {over == 0 && kkt_fail == 0 && secs < 60.0,
          fmt("100 seeds N=2..5: max relative gap to the 1e-3 grid %.3g at seed %d (limit 1e-3), %d over, "
              "solver at or below grid on %d; gap to a 1e-7 grid %.2g; KKT failures %d, %.1f s",
              worst, worst_seed, over, below_grid, worst_fine, kkt_fail, secs)};
}

// 5. Gradient of the personalized objective.
Outcome gradient(const ExperimentConfig& desk) {
  double worst = 0.0;
  int checks = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto pool = data::synth_dataset(desk.data.synth, seed);
    auto spec = desk.data.partition;
    spec.seed = seed;
    auto shards = data::partition_noniid(pool, 4, spec);
    learn::Classifier model(learn::ModelLayout::logistic(static_cast<int>(pool.input_dim()), pool.num_classes));
    Rng rng = Rng::derive(seed, Stream::kModelInit);
    learn::GroupTree tree;
    tree.group_of = {0, 0, 1, 1};
    tree.num_groups = 2;
    for (int u = 0; u < 4; ++u) tree.personal.push_back(model.init(rng, desk.learning.init_scale));
    learn::hierarchical_average(tree);
    std::vector<std::size_t> coords;
    for (int k = 0; k < 20; ++k) coords.push_back(static_cast<std::size_t>(rng.below(model.num_params())));
    for (double eta : {0.0, 0.001}) {
      learn::Weights grad(model.num_params(), 0.0);
      const auto& data = shards[0].train;
      learn::personalized_objective(model, tree.personal[0], data, tree, 0, eta, learn::Regularizer::kNone, grad);
      auto f = [&](const std::vector<double>& w) {
        return learn::personalized_objective(model, w, data, tree, 0, eta);
      };
      worst = std::max(worst, oracle::fd_max_rel_error(f, tree.personal[0], grad, coords));
      checks += 20;
    }
  }
  return {worst <= 1e-4, fmt("%d coordinates over 5 seeds and eta in {0, 0.001}: max relative error %.3g (limit 1e-4)",
                             checks, worst)};
}

// 6. Partial aggregation over SBSs equals direct averaging.
Outcome aggregation() {
  double worst = 0.0;
  for (std::uint64_t split = 1; split <= 50; ++split) {
    Rng rng(split * 7919);
    const int n = 5 + static_cast<int>(rng.below(16)), g = 1 + static_cast<int>(rng.below(4)),
              s = 1 + static_cast<int>(rng.below(5));
    const std::size_t dim = 3 + rng.below(20);
    learn::GroupTree tree;
    tree.num_groups = g;
    for (int u = 0; u < n; ++u) tree.group_of.push_back(u < g ? u : static_cast<int>(rng.below(static_cast<std::uint64_t>(g))));
    std::vector<int> serving;
    for (int u = 0; u < n; ++u)
      serving.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(s + 1))) - 1);  // -1: virtual
    for (int u = 0; u < n; ++u) {
      learn::Weights w(dim);
      for (double& x : w) x = rng.normal(0.0, 3.0);
      tree.personal.push_back(std::move(w));
    }
    std::vector<std::vector<learn::PartialSum>> parts;
    for (int point = -1; point < s; ++point) parts.push_back(learn::partial_group_aggregate(point, serving, tree));
    learn::combine_partials(parts, tree);

    for (int grp = 0; grp < g; ++grp) {
      std::vector<double> direct(dim, 0.0);
      int count = 0;
      for (int u = 0; u < n; ++u)
        if (tree.group_of[static_cast<std::size_t>(u)] == grp) {
          ++count;
          for (std::size_t i = 0; i < dim; ++i) direct[i] += tree.personal[static_cast<std::size_t>(u)][i];
        }
      for (std::size_t i = 0; i < dim; ++i)
        worst = std::max(worst, std::abs(direct[i] / count - tree.group_models[static_cast<std::size_t>(grp)][i]));
    }
    for (std::size_t i = 0; i < dim; ++i) {
      double direct = 0.0;
      for (int u = 0; u < n; ++u) direct += tree.personal[static_cast<std::size_t>(u)][i] / n;
      worst = std::max(worst, std::abs(direct - tree.regional[i]));
    }
  }
  return {worst <= 1e-12, fmt("50 random group/SBS splits: max coordinate deviation %.3g (limit 1e-12)", worst)};
}

struct LearningRun {
  double spec = 0.0, gen = 0.0, rho = 0.0, p = 1.0;
  double secs = 0.0;
};

LearningRun learning_run(ExperimentConfig cfg, LearningScheme scheme) {
  auto t0 = std::chrono::steady_clock::now();
  cfg.learning.scheme = scheme;
  auto result = experiment::run_experiment(cfg);
  auto summary = experiment::summarize(cfg, result);
  if (!result.ok()) throw Error(ErrorCode::kInternal, summary["failures"].dump());
  LearningRun out;
  out.spec = summary["metrics"]["final_specialization_mean"]["mean"].get<double>();
  out.gen = summary["metrics"]["final_generalization_mean"]["mean"].get<double>();
  if (!summary["distance_trend"].is_null()) {
    out.rho = summary["distance_trend"]["spearman_rho"].get<double>();
    out.p = summary["distance_trend"]["p_value"].get<double>();
  }
  out.secs = elapsed(t0);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 9. Two CLI runs with the same config and seed.
Outcome determinism(const std::string& cli, const std::string& desk_path, const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string base = "\"" + cli + "\" --config \"" + desk_path +
                           "\" --seed 7 --replications 2 --set train.rounds=5 --set network.num_ues=20 "
                           "--trace-matching run --out-dir ";
  for (const char* name : {"a", "b"}) {
    std::string cmd = base + "\"" + (work / name).string() + "\" > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
  }
  int compared = 0;
  std::string differing;
  for (const auto& entry : fs::directory_iterator(work / "a")) {
    auto ext = entry.path().extension();
    if (ext != ".csv" && ext != ".jsonl" && ext != ".json") continue;
    ++compared;
    auto other = work / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) differing += entry.path().filename().string() + " ";
  }
  return {compared >= 5 && differing.empty(),
          differing.empty() ? fmt("%d output files byte-identical across two CLI runs", compared)
                            : "differing files: " + differing};
}

// 10. Swap counts against the stored scaling constant.
Outcome scaling(const std::string& reference_path) {
  auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(reference_path);
  if (!in) return {false, "cannot read " + reference_path};
  auto ref = nlohmann::json::parse(in);
  auto doc = ConfigDocument();
  doc.merge({{"experiment",
              {{"bench_ues", ref["bench_ues"]},
               {"bench_sbs", ref["bench_sbs"]},
               {"bench_instances", ref["bench_instances"]},
               {"seed", ref["seed"]}}}});
  auto rows = experiment::matching_bench(doc.build());
  auto fit = experiment::fit_swap_scaling(rows);
  const double c_ref = ref["c"].get<double>();
  std::string curve;
  for (std::size_t k = 0; k < fit.num_ues.size(); ++k)
    curve += fmt("%s%d:%.1f", k ? " " : "", fit.num_ues[k], fit.mean_swaps[k]);
  return {fit.c <= 2.0 * c_ref,
          fmt("fitted c %.4f vs stored %.4f (fail above %.4f); mean swaps by N [%s], %.1f s", fit.c, c_ref,
              2.0 * c_ref, curve.c_str(), elapsed(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 5) {
    std::fprintf(stderr, "usage: %s <desk-config> <swap-reference> <cli> <work-dir>\n", argv[0]);
    return 2;
  }
  const std::string desk_path = argv[1], reference = argv[2], cli = argv[3];
  const fs::path work = argv[4];
  const ExperimentConfig desk = ConfigDocument::from_file(desk_path).build();

  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %-22s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "stability", stability);
  report(2, "optimality-gap", optimality_gap);
  report(3, "baseline-dominance", dominance);
  report(4, "allocation", allocation);
  report(5, "gradient-check", [&] { return gradient(desk); });
  report(6, "aggregation-invariance", aggregation);

  LearningRun dem, fed;
  bool learning_ok = true;
  std::string learning_error;
  try {
    dem = learning_run(desk, LearningScheme::kDemLearn);
    fed = learning_run(desk, LearningScheme::kFedAvg);
  } catch (const std::exception& e) {
    learning_ok = false;
    learning_error = e.what();
  }
  report(7, "learning-gap", [&]() -> Outcome {
    if (!learning_ok) return {false, "error: " + learning_error};
    double gen_gap = 100 * (dem.gen - fed.gen), spec_gap = 100 * (dem.spec - fed.spec);
    return {gen_gap >= 10.0 && spec_gap >= -2.0 && dem.secs + fed.secs < 300.0,
            fmt("%zu replications: generalization %.3f vs FedAvg %.3f (%+.1f pp, need +10), specialization %.3f vs "
                "%.3f (%+.1f pp, need -2 or better), %.1f s",
                static_cast<std::size_t>(desk.run.replications), dem.gen, fed.gen, gen_gap, dem.spec, fed.spec,
                spec_gap, dem.secs + fed.secs)};
  });
  report(8, "clustering-trend", [&]() -> Outcome {
    if (!learning_ok) return {false, "error: " + learning_error};
    return {dem.rho < 0.0 && dem.p < 0.05,
            fmt("Spearman rho %.3f, p %.3g over %d rounds (need rho < 0, p < 0.05)", dem.rho, dem.p,
                desk.learning.train.rounds)};
  });
  report(9, "determinism", [&] { return determinism(cli, desk_path, work / "determinism"); });
  report(10, "stopping-time-scaling", [&] { return scaling(reference); });

  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
