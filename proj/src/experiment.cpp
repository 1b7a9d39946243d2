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

#include "edgedem/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "edgedem/data.hpp"
#include "edgedem/demlearn.hpp"
#include "edgedem/latency.hpp"
#include "edgedem/matching.hpp"
#include "edgedem/model.hpp"
#include "edgedem/radio.hpp"
#include "edgedem/stats.hpp"

namespace edgedem::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// JSON has no NaN; missing metrics become null.
json jnum(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

// Appends a held-out archive to the training archive, or reserves the tail of
// the training archive when none is given.
data::Dataset load_idx_pool(const DataSettings& cfg) {
  data::Dataset train = data::load_idx_archive(cfg.idx_images, cfg.idx_labels);
  if (cfg.idx_test_images.empty()) {
    auto test = static_cast<std::size_t>(std::llround(cfg.synth.test_fraction * static_cast<double>(train.size())));
    train.train_count = train.size() - test;
    return train;
  }
  data::Dataset test = data::load_idx_archive(cfg.idx_test_images, cfg.idx_test_labels);
  if (test.input_dim() != train.input_dim())
    throw Error(ErrorCode::kCountMismatch, "train and test archives have different image sizes");
  data::Dataset pool;
  pool.num_classes = std::max(train.num_classes, test.num_classes);
  pool.features = Matrix(train.size() + test.size(), train.input_dim());
  for (std::size_t r = 0; r < train.size(); ++r)
    std::copy(train.features.row(r).begin(), train.features.row(r).end(), pool.features.row(r).begin());
  for (std::size_t r = 0; r < test.size(); ++r)
    std::copy(test.features.row(r).begin(), test.features.row(r).end(),
              pool.features.row(train.size() + r).begin());
  pool.labels = train.labels;
  pool.labels.insert(pool.labels.end(), test.labels.begin(), test.labels.end());
  for (std::size_t r = 0; r < pool.labels.size(); ++r) pool.ids.push_back(r);
  pool.train_count = train.size();
  return pool;
}

learn::ModelLayout layout_for(const LearningSettings& cfg, int input_dim, int num_classes) {
  return cfg.model == learn::ModelKind::kLogistic
             ? learn::ModelLayout::logistic(input_dim, num_classes)
             : learn::ModelLayout::mlp(input_dim, cfg.hidden, num_classes);
}

std::vector<learn::Weights> cluster_features(const learn::Classifier& model,
                                             const std::vector<learn::Weights>& personal,
                                             const std::vector<data::UeShard>& shards,
                                             ClusterFeatures kind) {
  if (kind == ClusterFeatures::kWeights) return personal;
  std::vector<learn::Weights> out;
  for (std::size_t n = 0; n < personal.size(); ++n) {
    learn::Weights grad(personal[n].size(), 0.0);
    model.cross_entropy(personal[n], shards[n].train, {}, grad);
    learn::Weights f = personal[n];
    f.insert(f.end(), grad.begin(), grad.end());
    out.push_back(std::move(f));
  }
  return out;
}

bool snapshot_round(const RunSettings& run, int round) {
  return run.snapshot_rounds.empty() ||
         std::find(run.snapshot_rounds.begin(), run.snapshot_rounds.end(), round) !=
             run.snapshot_rounds.end();
}

// Phase I for one round. `state` carries the matching between rounds.
struct PhaseOne {
  const ExperimentConfig& cfg;
  const matching::MatchingContext& ctx;
  std::uint64_t seed;
  std::optional<matching::Matching> previous;
  std::optional<matching::Evaluation> cached;  // schemes that do not change
  matching::PreferenceState prefs;

  matching::MatchingResult step(int round) {
    using matching::AllocMode;
    matching::MatchingResult out;
    switch (cfg.matching.scheme) {
      case MatchingScheme::kProposal: {
        if (!previous) {
          previous = matching::initial_association(ctx);
          prefs = matching::build_preferences(ctx, matching::PreferenceBasis::kRsrp);
        } else if ((round - 1) % cfg.matching.preference_refresh == 0) {
          auto current = matching::evaluate(ctx, *previous);
          prefs = matching::build_preferences(ctx, matching::PreferenceBasis::kLatency, &current);
        }
        out = matching::run_matching(ctx, *previous, prefs);
        previous = out.evaluation.matching;
        return out;
      }
      case MatchingScheme::kRandom: {
        auto m = matching::baseline_random(ctx, Rng::mix(seed) ^ static_cast<std::uint64_t>(round));
        out.evaluation = matching::evaluate(ctx, m);
        return out;
      }
      case MatchingScheme::kUniform:
        if (!cached) cached = matching::baseline_uniform(ctx, matching::initial_association(ctx));
        break;
      case MatchingScheme::kOneSided:
        if (!cached) cached = matching::evaluate(ctx, matching::baseline_one_sided(ctx));
        break;
      case MatchingScheme::kOptimal:
        if (!cached) cached = matching::evaluate(ctx, matching::baseline_optimal(ctx));
        break;
    }
    out.evaluation = *cached;
    return out;
  }
};

// Phase II state: personal models, the group tree and the FedAvg model.
struct PhaseTwo {
  const ExperimentConfig& cfg;
  const std::vector<data::UeShard>& shards;
  const data::Dataset& pool;
  learn::Classifier model;
  learn::GroupTree tree;
  learn::Weights global;
  std::vector<double> data_sizes;
  std::uint64_t seed;

  PhaseTwo(const ExperimentConfig& c, const std::vector<data::UeShard>& s, const data::Dataset& p,
           std::uint64_t sd)
      : cfg(c),
        shards(s),
        pool(p),
        model(layout_for(c.learning, static_cast<int>(p.input_dim()), p.num_classes)),
        seed(sd) {
    const int n = static_cast<int>(shards.size());
    tree.group_of.assign(static_cast<std::size_t>(n), 0);
    tree.num_groups = 1;
    for (int u = 0; u < n; ++u) {
      Rng rng = Rng::derive(seed, Stream::kModelInit, static_cast<std::uint64_t>(u));
      tree.personal.push_back(model.init(rng, cfg.learning.init_scale));
      data_sizes.push_back(static_cast<double>(shards[static_cast<std::size_t>(u)].train.size()));
    }
    global = tree.personal.front();
  }

  // Local training and aggregation; returns the clustering for DemLearn.
  std::optional<learn::Clustering> step(int round, const std::vector<int>& serving, int num_sbs) {
    const auto& tc = cfg.learning.train;
    const int n = static_cast<int>(shards.size());
    const bool dem = cfg.learning.scheme == LearningScheme::kDemLearn;
    for (int u = 0; u < n; ++u) {
      Rng rng = Rng::derive(seed, Stream::kLocalTrain,
                            (static_cast<std::uint64_t>(round) << 32) | static_cast<std::uint64_t>(u));
      const auto& start = dem ? tree.personal[static_cast<std::size_t>(u)] : global;
      tree.personal[static_cast<std::size_t>(u)] =
          learn::local_train(model, start, shards[static_cast<std::size_t>(u)].train,
                             dem ? &tree : nullptr, u, tc, rng);
    }
    if (!dem) {
      global = learn::fedavg_round(tree.personal, data_sizes);
      return std::nullopt;
    }
    auto features = cluster_features(model, tree.personal, shards, cfg.learning.cluster_features);
    auto clustering = learn::recluster(features, std::min(cfg.learning.num_groups, n), cfg.learning.linkage);
    tree.group_of = clustering.group_of;
    tree.num_groups = clustering.num_groups;
    // Every SBS (and the virtual node) sums its members per group; the MBS
    // finishes the averages.
    std::vector<std::vector<learn::PartialSum>> partials;
    for (int s = 0; s < num_sbs; ++s) partials.push_back(learn::partial_group_aggregate(s, serving, tree));
    partials.push_back(learn::partial_group_aggregate(kVirtualNode, serving, tree));
    learn::combine_partials(partials, tree);
    return clustering;
  }

  const learn::Weights& regional() const {
    return cfg.learning.scheme == LearningScheme::kDemLearn && !tree.regional.empty() ? tree.regional
                                                                                      : global;
  }
};

}  // namespace

bool ExperimentResult::ok() const {
  return std::none_of(replications.begin(), replications.end(),
                      [](const ReplicationResult& r) { return r.error.has_value(); });
}

std::uint64_t replication_seed(std::uint64_t base, int replication) {
  return base + static_cast<std::uint64_t>(replication);
}

void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  if (count <= 0) return;
  int threads = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, count);
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

ReplicationResult replicate(const ExperimentConfig& cfg, int replication, const data::Dataset* shared_pool) {
  ReplicationResult res;
  res.replication = replication;
  res.seed = replication_seed(cfg.run.seed, replication);
  const std::uint64_t seed = res.seed;
  const int n_ues = cfg.network.num_ues;
  const int n_sbs = cfg.network.num_sbs;
  const bool learning = cfg.learning.scheme != LearningScheme::kNone;
  int round = 0;
  try {
    auto net = radio::generate_topology(cfg.radio, n_ues, n_sbs, seed);

    data::Dataset own_pool;
    if (!shared_pool) own_pool = data::synth_dataset(cfg.data.synth, seed);
    const data::Dataset& pool = shared_pool ? *shared_pool : own_pool;
    data::PartitionSpec spec = cfg.data.partition;
    spec.seed = seed;
    auto shards = data::partition_noniid(pool, n_ues, spec);
    res.manifest = data::manifest(shards, spec);
    std::vector<double> sizes;
    for (const auto& s : shards) sizes.push_back(static_cast<double>(s.train.size()));

    auto profiles = latency::generate_profiles(cfg.compute, n_ues, seed, sizes);
    auto ctx = matching::make_context(net, cfg.radio, profiles, cfg.budget, cfg.network.quotas,
                                      cfg.alloc, cfg.network.virtual_rate_bps);
    const latency::LinkTable links{ctx.rate_coeff, ctx.virtual_rate_bps};

    data::Dataset gen_pool;
    std::optional<PhaseTwo> learner;
    if (learning) {
      gen_pool = data::build_generalization_pool(shards);
      learner.emplace(cfg, shards, gen_pool, seed);
    }

    PhaseOne phase_one{cfg, ctx, seed, std::nullopt, std::nullopt, {}};
    double cumulative_ms = 0.0;
    const auto& tc = cfg.learning.train;
    for (round = 1; round <= tc.rounds; ++round) {
      auto matched = phase_one.step(round);
      const auto& eval = matched.evaluation;
      auto assoc = matching::to_association(ctx, eval);
      auto report = latency::global_delay_system(assoc, links, cfg.budget, profiles);

      RoundRecord rec;
      rec.replication = replication;
      rec.round = round;
      rec.matching = cfg.matching.scheme;
      rec.learning = cfg.learning.scheme;
      rec.system_delay_ms = to_milliseconds(Seconds(report.system_global_s));
      cumulative_ms += rec.system_delay_ms;
      rec.cumulative_delay_ms = cumulative_ms;
      rec.swaps = matched.stats.swaps;
      for (double s : report.per_sbs_global_s) rec.sbs_delays_ms.push_back(to_milliseconds(Seconds(s)));
      rec.sbs_delays_ms.push_back(to_milliseconds(Seconds(report.virtual_global_s)));

      if (cfg.run.trace_matching) {
        for (const auto& e : matched.events)
          res.matching_trace.push_back({{"replication", replication},
                                        {"round", round},
                                        {"index", e.index},
                                        {"ue_a", e.proposal.ue_a},
                                        {"ue_b", e.proposal.ue_b},
                                        {"sbs_from", e.proposal.sbs_from},
                                        {"sbs_to", e.proposal.sbs_to},
                                        {"delay_before_ms", to_milliseconds(Seconds(e.delay_before_s))},
                                        {"delay_after_ms", to_milliseconds(Seconds(e.delay_after_s))}});
      }

      rec.regional_acc = rec.specialization_mean = rec.generalization_mean = rec.mean_pairwise_distance = kNaN;
      json groups = nullptr;
      if (learner) {
        if (round % tc.tau == 0) {
          auto clustering = learner->step(round, eval.matching.assignment, n_sbs);
          if (clustering && snapshot_round(cfg.run, round)) {
            json snap = clustering->to_json();
            snap["replication"] = replication;
            snap["round"] = round;
            res.clusters.push_back(std::move(snap));
          }
        }
        const auto& model = learner->model;
        double spec_sum = 0.0, gen_sum = 0.0;
        for (int u = 0; u < n_ues; ++u) {
          const auto& w = learner->tree.personal[static_cast<std::size_t>(u)];
          spec_sum += model.accuracy(w, shards[static_cast<std::size_t>(u)].test);
          gen_sum += model.accuracy(w, gen_pool);
        }
        rec.specialization_mean = spec_sum / n_ues;
        rec.generalization_mean = gen_sum / n_ues;
        rec.regional_acc = model.accuracy(learner->regional(), gen_pool);
        rec.mean_pairwise_distance = learn::mean_pairwise_distance(learner->tree.personal);
        if (cfg.learning.scheme == LearningScheme::kDemLearn) groups = learner->tree.group_of;
      }

      json beta = json::array();
      for (double b : assoc.beta) beta.push_back(b);
      json sbs_ms = json::array();
      for (double d : rec.sbs_delays_ms) sbs_ms.push_back(d);
      res.trace.push_back({{"replication", replication},
                           {"round", round},
                           {"assignment", eval.matching.assignment},
                           {"beta", beta},
                           {"system_delay_ms", rec.system_delay_ms},
                           {"cumulative_delay_ms", rec.cumulative_delay_ms},
                           {"sbs_delays_ms", sbs_ms},
                           {"swaps", rec.swaps},
                           {"groups", groups},
                           {"regional_acc", jnum(rec.regional_acc)},
                           {"specialization_mean", jnum(rec.specialization_mean)},
                           {"generalization_mean", jnum(rec.generalization_mean)},
                           {"mean_pairwise_distance", jnum(rec.mean_pairwise_distance)}});
      res.rounds.push_back(std::move(rec));
    }
  } catch (const Error& e) {
    res.error = e.code();
    res.error_message = e.what();
  } catch (const std::exception& e) {
    res.error = ErrorCode::kInternal;
    res.error_message = e.what();
  }
  if (res.error) {
    res.trace.push_back({{"replication", replication},
                         {"round", round},
                         {"error", to_string(*res.error)},
                         {"message", res.error_message}});
  }
  return res;
}

std::unique_ptr<data::Dataset> shared_pool_for(const ExperimentConfig& cfg) {
  if (cfg.data.source != DataSource::kIdx) return nullptr;
  return std::make_unique<data::Dataset>(load_idx_pool(cfg.data));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

void write_jsonl(const fs::path& path, const std::vector<const json*>& lines) {
  std::string text;
  for (const json* j : lines) text += j->dump() + "\n";
  write_text(path, text);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

json mean_std(std::span<const double> xs) {
  std::vector<double> finite;
  for (double x : xs)
    if (!std::isnan(x)) finite.push_back(x);
  if (finite.empty()) return {{"mean", nullptr}, {"std", nullptr}, {"count", 0}};
  return {{"mean", stats::mean(finite)}, {"std", stats::stddev(finite)}, {"count", finite.size()}};
}

}  // namespace

ReplicationResult run_replication(const ExperimentConfig& config, int replication) {
  config.validate();
  auto pool = shared_pool_for(config);
  return replicate(config, replication, pool.get());
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  auto pool = shared_pool_for(config);
  ExperimentResult result;
  result.replications.resize(static_cast<std::size_t>(config.run.replications));
  parallel_for(config.run.replications, config.run.workers, [&](int r) {
    result.replications[static_cast<std::size_t>(r)] = replicate(config, r, pool.get());
  });
  return result;
}

const std::string& rounds_csv_header() {
  static const std::string header =
      "replication,round,matching_scheme,learning_scheme,system_delay_ms,cumulative_delay_ms,swaps,"
      "sbs_delays_ms,regional_acc,specialization_mean,generalization_mean,mean_pairwise_distance";
  return header;
}

std::string format_round(const RoundRecord& r) {
  std::string sbs;
  for (std::size_t i = 0; i < r.sbs_delays_ms.size(); ++i) {
    if (i) sbs += ';';
    sbs += num(r.sbs_delays_ms[i]);
  }
  std::string line = std::to_string(r.replication) + "," + std::to_string(r.round) + "," +
                     to_string(r.matching) + "," + to_string(r.learning) + "," + num(r.system_delay_ms) +
                     "," + num(r.cumulative_delay_ms) + "," + std::to_string(r.swaps) + "," + sbs + "," +
                     num(r.regional_acc) + "," + num(r.specialization_mean) + "," +
                     num(r.generalization_mean) + "," + num(r.mean_pairwise_distance);
  return line;
}

json summarize(const ExperimentConfig& config, const ExperimentResult& result) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["matching_scheme"] = to_string(config.matching.scheme);
  doc["learning_scheme"] = to_string(config.learning.scheme);
  doc["seed"] = config.run.seed;
  doc["replications"] = result.replications.size();

  json failures = json::array();
  std::vector<double> mean_delay, total_delay, swaps, regional, spec, gen, dist;
  std::vector<double> all_delay;
  int max_rounds = 0;
  for (const auto& rep : result.replications) {
    if (rep.error)
      failures.push_back({{"replication", rep.replication}, {"error", to_string(*rep.error)},
                          {"message", rep.error_message}});
    max_rounds = std::max(max_rounds, static_cast<int>(rep.rounds.size()));
    if (rep.rounds.empty()) continue;
    double sum = 0.0, sw = 0.0;
    for (const auto& r : rep.rounds) {
      sum += r.system_delay_ms;
      sw += r.swaps;
      all_delay.push_back(r.system_delay_ms);
    }
    mean_delay.push_back(sum / static_cast<double>(rep.rounds.size()));
    swaps.push_back(sw);
    const auto& last = rep.rounds.back();
    total_delay.push_back(last.cumulative_delay_ms);
    regional.push_back(last.regional_acc);
    spec.push_back(last.specialization_mean);
    gen.push_back(last.generalization_mean);
    dist.push_back(last.mean_pairwise_distance);
  }
  doc["failures"] = failures;
  doc["metrics"] = {{"mean_system_delay_ms", mean_std(mean_delay)},
                    {"total_delay_ms", mean_std(total_delay)},
                    {"total_swaps", mean_std(swaps)},
                    {"final_regional_acc", mean_std(regional)},
                    {"final_specialization_mean", mean_std(spec)},
                    {"final_generalization_mean", mean_std(gen)},
                    {"final_mean_pairwise_distance", mean_std(dist)}};
  // Over every CSV row, so the column means can be recomputed from the file.
  doc["columns"] = {{"system_delay_ms", mean_std(all_delay)}};

  json curves = json::array();
  std::vector<double> round_idx, round_dist;
  for (int t = 0; t < max_rounds; ++t) {
    std::vector<double> d, s, g, a, m;
    for (const auto& rep : result.replications) {
      if (static_cast<int>(rep.rounds.size()) <= t) continue;
      const auto& r = rep.rounds[static_cast<std::size_t>(t)];
      d.push_back(r.system_delay_ms);
      s.push_back(r.specialization_mean);
      g.push_back(r.generalization_mean);
      a.push_back(r.regional_acc);
      m.push_back(r.mean_pairwise_distance);
    }
    json row = {{"round", t + 1},
                {"system_delay_ms", mean_std(d)},
                {"specialization_mean", mean_std(s)},
                {"generalization_mean", mean_std(g)},
                {"regional_acc", mean_std(a)},
                {"mean_pairwise_distance", mean_std(m)}};
    if (!row["mean_pairwise_distance"]["mean"].is_null()) {
      round_idx.push_back(t + 1);
      round_dist.push_back(row["mean_pairwise_distance"]["mean"].get<double>());
    }
    curves.push_back(std::move(row));
  }
  doc["per_round"] = curves;
  if (round_idx.size() >= 3) {
    auto c = stats::spearman(round_idx, round_dist);
    doc["distance_trend"] = {{"spearman_rho", c.rho}, {"p_value", c.p_value}};
  } else {
    doc["distance_trend"] = nullptr;
  }
  return doc;
}

void emit_results(const ExperimentConfig& config, const ExperimentResult& result, const fs::path& out_dir) {
  ensure_dir(out_dir);
  std::string csv = rounds_csv_header() + "\n";
  std::vector<const json*> trace, mtrace, clusters;
  json manifests = json::array();
  for (const auto& rep : result.replications) {
    for (const auto& r : rep.rounds) csv += format_round(r) + "\n";
    for (const auto& j : rep.trace) trace.push_back(&j);
    for (const auto& j : rep.matching_trace) mtrace.push_back(&j);
    for (const auto& j : rep.clusters) clusters.push_back(&j);
    manifests.push_back({{"replication", rep.replication}, {"seed", rep.seed}, {"partition", rep.manifest}});
  }
  write_text(out_dir / "rounds.csv", csv);
  write_jsonl(out_dir / "trace.jsonl", trace);
  if (config.run.trace_matching) write_jsonl(out_dir / "matching_trace.jsonl", mtrace);
  if (config.learning.scheme == LearningScheme::kDemLearn) write_jsonl(out_dir / "clusters.jsonl", clusters);
  write_text(out_dir / "manifest.json", manifests.dump(2) + "\n");
  write_text(out_dir / "summary.json", summarize(config, result).dump(2) + "\n");
}

std::vector<SweepCell> sweep(const ExperimentConfig& config) {
  config.validate();
  struct Job {
    std::size_t cell;
    int replication;
  };
  std::vector<SweepCell> cells;
  std::vector<ExperimentConfig> cell_configs;
  for (const auto& scheme : config.run.sweep_schemes)
    for (int n : config.run.sweep_ues)
      for (int s : config.run.sweep_sbs) {
        ExperimentConfig c = config;
        c.network.num_ues = n;
        c.network.num_sbs = s;
        c.matching.scheme = parse_matching_scheme(scheme);
        c.learning.scheme = LearningScheme::kNone;
        c.learning.num_groups = std::min(c.learning.num_groups, n);
        c.validate();
        cells.push_back({scheme, n, s, config.run.replications, 0, 0, 0, 0, 0});
        cell_configs.push_back(std::move(c));
      }
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int r = 0; r < config.run.replications; ++r) jobs.push_back({c, r});

  auto pool = shared_pool_for(config);
  std::vector<ReplicationResult> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), config.run.workers, [&](int j) {
    const auto& job = jobs[static_cast<std::size_t>(j)];
    results[static_cast<std::size_t>(j)] = replicate(cell_configs[job.cell], job.replication, pool.get());
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> delay, total, swaps;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].cell != c) continue;
      const auto& rep = results[j];
      if (rep.error || rep.rounds.empty()) {
        ++cells[c].failed;
        continue;
      }
      double sum = 0.0, sw = 0.0;
      for (const auto& r : rep.rounds) {
        sum += r.system_delay_ms;
        sw += r.swaps;
      }
      delay.push_back(sum / static_cast<double>(rep.rounds.size()));
      total.push_back(rep.rounds.back().cumulative_delay_ms);
      swaps.push_back(sw);
    }
    if (delay.empty()) {
      cells[c].mean_delay_ms = cells[c].std_delay_ms = cells[c].mean_total_delay_ms = cells[c].mean_swaps = kNaN;
      continue;
    }
    cells[c].mean_delay_ms = stats::mean(delay);
    cells[c].std_delay_ms = stats::stddev(delay);
    cells[c].mean_total_delay_ms = stats::mean(total);
    cells[c].mean_swaps = stats::mean(swaps);
  }
  return cells;
}

void emit_sweep(const ExperimentConfig& config, const std::vector<SweepCell>& cells, const fs::path& out_dir) {
  ensure_dir(out_dir);
  std::string csv =
      "scheme,num_ues,num_sbs,replications,failed,mean_delay_ms,std_delay_ms,mean_total_delay_ms,mean_swaps\n";
  for (const auto& c : cells)
    csv += c.scheme + "," + std::to_string(c.num_ues) + "," + std::to_string(c.num_sbs) + "," +
           std::to_string(c.replications) + "," + std::to_string(c.failed) + "," + num(c.mean_delay_ms) + "," +
           num(c.std_delay_ms) + "," + num(c.mean_total_delay_ms) + "," + num(c.mean_swaps) + "\n";
  write_text(out_dir / "sweep.csv", csv);

  json matrix;
  matrix["schema_version"] = kSchemaVersion;
  matrix["rows"] = "num_ues";
  matrix["cols"] = "num_sbs";
  matrix["num_ues"] = config.run.sweep_ues;
  matrix["num_sbs"] = config.run.sweep_sbs;
  matrix["value"] = "mean_delay_ms";
  json schemes = json::object();
  std::size_t k = 0;
  for (const auto& scheme : config.run.sweep_schemes) {
    json grid = json::array();
    for (std::size_t i = 0; i < config.run.sweep_ues.size(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < config.run.sweep_sbs.size(); ++j) row.push_back(jnum(cells[k++].mean_delay_ms));
      grid.push_back(std::move(row));
    }
    schemes[scheme] = std::move(grid);
  }
  matrix["schemes"] = schemes;
  write_text(out_dir / "sweep_matrix.json", matrix.dump(2) + "\n");
}

std::vector<BenchRow> matching_bench(const ExperimentConfig& config) {
  config.validate();
  std::vector<BenchRow> rows;
  for (int n : config.run.bench_ues)
    for (int i = 0; i < config.run.bench_instances; ++i)
      rows.push_back({n, config.run.bench_sbs, i, replication_seed(config.run.seed, i), 0, 0.0, 0.0});
  radio::RadioConfig radio = config.radio;
  if (!radio.subbands_per_sbs.empty() &&
      radio.subbands_per_sbs.size() != static_cast<std::size_t>(config.run.bench_sbs))
    throw Error(ErrorCode::kInvalidConfig, "radio.subbands_per_sbs does not match experiment.bench_sbs");
  if (!config.network.quotas.empty() &&
      config.network.quotas.size() != static_cast<std::size_t>(config.run.bench_sbs))
    throw Error(ErrorCode::kInvalidConfig, "network.quotas does not match experiment.bench_sbs");
  parallel_for(static_cast<int>(rows.size()), config.run.workers, [&](int k) {
    auto& row = rows[static_cast<std::size_t>(k)];
    auto net = radio::generate_topology(radio, row.num_ues, row.num_sbs, row.seed);
    auto profiles = latency::generate_profiles(config.compute, row.num_ues, row.seed);
    auto ctx = matching::make_context(net, radio, profiles, config.budget, config.network.quotas,
                                      config.alloc, config.network.virtual_rate_bps);
    auto result = matching::run_matching(ctx);
    row.swaps = result.stats.swaps;
    row.system_delay_ms = to_milliseconds(Seconds(result.evaluation.system_delay_s));
    row.wall_seconds = result.stats.wall_seconds;
  });
  return rows;
}

BenchFit fit_swap_scaling(const std::vector<BenchRow>& rows) {
  BenchFit fit;
  for (const auto& r : rows) {
    const double ns = static_cast<double>(r.num_ues) * r.num_sbs;
    if (ns > 1.0) fit.c = std::max(fit.c, r.swaps / (ns * std::log(ns)));
    auto it = std::find(fit.num_ues.begin(), fit.num_ues.end(), r.num_ues);
    if (it == fit.num_ues.end()) {
      fit.num_ues.push_back(r.num_ues);
      fit.mean_swaps.push_back(0.0);
      fit.max_swaps.push_back(0);
      it = fit.num_ues.end() - 1;
    }
    auto i = static_cast<std::size_t>(it - fit.num_ues.begin());
    fit.mean_swaps[i] += r.swaps;
    fit.max_swaps[i] = std::max(fit.max_swaps[i], r.swaps);
  }
  for (std::size_t i = 0; i < fit.num_ues.size(); ++i) {
    auto count = std::count_if(rows.begin(), rows.end(), [&](const BenchRow& r) { return r.num_ues == fit.num_ues[i]; });
    fit.mean_swaps[i] /= static_cast<double>(count);
  }
  return fit;
}

void emit_bench(const std::vector<BenchRow>& rows, const fs::path& out_dir) {
  ensure_dir(out_dir);
  std::string csv = "num_ues,num_sbs,instance,seed,swaps,system_delay_ms,wall_seconds\n";
  for (const auto& r : rows)
    csv += std::to_string(r.num_ues) + "," + std::to_string(r.num_sbs) + "," + std::to_string(r.instance) + "," +
           std::to_string(r.seed) + "," + std::to_string(r.swaps) + "," + num(r.system_delay_ms) + "," +
           num(r.wall_seconds) + "\n";
  write_text(out_dir / "bench.csv", csv);
  auto fit = fit_swap_scaling(rows);
  json doc = {{"schema_version", kSchemaVersion},
              {"bound", "swaps <= c * N * S * ln(N * S)"},
              {"c", fit.c},
              {"num_ues", fit.num_ues},
              {"mean_swaps", fit.mean_swaps},
              {"max_swaps", fit.max_swaps}};
  write_text(out_dir / "bench_summary.json", doc.dump(2) + "\n");
}

ReplicationResult cluster_snapshot(const ExperimentConfig& config, int replication, const fs::path& out_dir) {
  ExperimentConfig c = config;
  c.learning.scheme = LearningScheme::kDemLearn;
  auto rep = run_replication(c, replication);
  if (rep.error) throw Error(*rep.error, rep.error_message);
  ensure_dir(out_dir);
  std::vector<const json*> lines;
  for (const auto& j : rep.clusters) lines.push_back(&j);
  write_jsonl(out_dir / "clusters.jsonl", lines);
  json last = rep.clusters.empty() ? json(nullptr) : rep.clusters.back();
  json doc = {{"schema_version", kSchemaVersion},
              {"replication", replication},
              {"seed", rep.seed},
              {"snapshots", rep.clusters.size()},
              {"final", last}};
  write_text(out_dir / "snapshot.json", doc.dump(2) + "\n");
  return rep;
}

}  // namespace edgedem::experiment
