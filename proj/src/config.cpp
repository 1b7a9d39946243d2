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

#include "edgedem/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "edgedem/error.hpp"

namespace edgedem {

using Json = nlohmann::json;

const char* to_string(MatchingScheme s) {
  switch (s) {
    case MatchingScheme::kProposal: return "proposal";
    case MatchingScheme::kRandom: return "random";
    case MatchingScheme::kUniform: return "uniform";
    case MatchingScheme::kOneSided: return "one_sided";
    case MatchingScheme::kOptimal: return "optimal";
  }
  return "?";
}

const char* to_string(LearningScheme s) {
  switch (s) {
    case LearningScheme::kDemLearn: return "demlearn";
    case LearningScheme::kFedAvg: return "fedavg";
    case LearningScheme::kNone: return "none";
  }
  return "?";
}

MatchingScheme parse_matching_scheme(const std::string& name) {
  for (auto s : {MatchingScheme::kProposal, MatchingScheme::kRandom, MatchingScheme::kUniform,
                 MatchingScheme::kOneSided, MatchingScheme::kOptimal})
    if (name == to_string(s)) return s;
  throw Error(ErrorCode::kInvalidConfig, "unknown matching scheme '" + name + "'");
}

LearningScheme parse_learning_scheme(const std::string& name) {
  for (auto s : {LearningScheme::kDemLearn, LearningScheme::kFedAvg, LearningScheme::kNone})
    if (name == to_string(s)) return s;
  throw Error(ErrorCode::kInvalidConfig, "unknown learning scheme '" + name + "'");
}

nlohmann::json default_config_json() {
  const radio::RadioConfig r;
  const latency::LearningBudget b;
  const latency::ProfileConfig c;
  const alloc::SolverOptions a;
  const data::SynthConfig s;
  const data::PartitionSpec p;
  const learn::TrainConfig t;
  const RunSettings run;
  return {
      {"radio",
       {{"bandwidth_total_hz", r.bandwidth_total_hz},
        {"num_subbands", r.num_subbands},
        {"rb_bandwidth_hz", r.rb_bandwidth_hz},
        {"subbands_per_sbs", Json::array()},
        {"tx_power_dbm", r.tx_power_dbm},
        {"noise_psd_dbm_hz", r.noise_psd_dbm_hz},
        {"shadowing_std_db", r.shadowing_std_db},
        {"pathloss_a_db", r.pathloss_a_db},
        {"pathloss_b_db", r.pathloss_b_db},
        {"network_radius_m", r.network_radius_m},
        {"ue_min_dist_m", r.ue_min_dist_m}}},
      {"network",
       {{"num_ues", 50}, {"num_sbs", 5}, {"quotas", Json::array()}, {"virtual_rate_bps", 0.0}}},
      {"budget",
       {{"global_accuracy", b.global_accuracy},
        {"local_accuracy", b.local_accuracy},
        {"task_constant", b.task_constant},
        {"local_constant", b.default_local_constant}}},
      {"compute",
       {{"cycles_min", c.cycles_min},
        {"cycles_max", c.cycles_max},
        {"f_min_hz", c.f_min_hz},
        {"f_max_lo_hz", c.f_max_lo_hz},
        {"f_max_hi_hz", c.f_max_hi_hz},
        {"model_size_dist", "uniform"},
        {"model_kb_min", c.model_kb_min},
        {"model_kb_max", c.model_kb_max},
        {"model_kb_median", c.model_kb_median},
        {"model_kb_sigma", c.model_kb_sigma},
        {"data_min", c.data_min},
        {"data_max", c.data_max}}},
      {"alloc", {{"tolerance_s", a.tolerance_s}, {"max_steps", a.max_steps}}},
      {"matching", {{"scheme", "proposal"}, {"preference_refresh", 1}}},
      {"train",
       {{"scheme", "demlearn"},
        {"model", "logistic"},
        {"hidden", 32},
        {"learning_rate", t.learning_rate},
        {"eta", t.eta},
        {"tau", t.tau},
        {"local_epochs", t.local_epochs},
        {"batch_size", t.batch_size},
        {"rounds", t.rounds},
        {"regularizer", "none"},
        {"num_groups", 3},
        {"linkage", "average"},
        {"cluster_features", "weights"},
        {"init_scale", 0.5}}},
      {"data",
       {{"source", "synthetic"},
        {"num_classes", s.num_classes},
        {"input_dim", s.input_dim},
        {"num_samples", s.num_samples},
        {"class_scale", s.class_scale},
        {"spread", s.spread},
        {"test_fraction", s.test_fraction},
        {"labels_per_ue", p.labels_per_ue},
        {"samples_min", p.samples_min},
        {"samples_max", p.samples_max},
        {"test_ratio", p.test_ratio},
        {"idx_images", ""},
        {"idx_labels", ""},
        {"idx_test_images", ""},
        {"idx_test_labels", ""}}},
      {"experiment",
       {{"seed", run.seed},
        {"replications", run.replications},
        {"workers", run.workers},
        {"trace_matching", run.trace_matching},
        {"sweep_ues", run.sweep_ues},
        {"sweep_sbs", run.sweep_sbs},
        {"sweep_schemes", run.sweep_schemes},
        {"bench_ues", run.bench_ues},
        {"bench_sbs", run.bench_sbs},
        {"bench_instances", run.bench_instances},
        {"snapshot_rounds", Json::array()}}},
  };
}

namespace {

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

void merge_into(Json& base, const Json& over, const std::string& path) {
  if (!over.is_object())
    throw Error(ErrorCode::kInvalidConfig, "expected an object at '" + path + "'");
  for (auto it = over.begin(); it != over.end(); ++it) {
    std::string where = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + where + "'");
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_into(slot, it.value(), where);
    } else {
      if (!same_kind(slot, it.value()))
        throw Error(ErrorCode::kInvalidConfig,
                    "key '" + where + "' expects " + std::string(slot.type_name()) + ", got " +
                        it.value().type_name());
      slot = it.value();
    }
  }
}

template <class T>
T get(const Json& doc, const char* section, const char* key) {
  try {
    return doc.at(section).at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("bad value for ") + section + "." + key + ": " + e.what());
  }
}

int get_int(const Json& doc, const char* section, const char* key) {
  const Json& v = doc.at(section).at(key);
  if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == static_cast<int>(v.get<double>())))
    throw Error(ErrorCode::kInvalidConfig, std::string(section) + "." + key + " must be an integer");
  return static_cast<int>(v.get<double>());
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

ConfigDocument::ConfigDocument() : doc_(default_config_json()) {}

ConfigDocument ConfigDocument::from_text(const std::string& text) {
  Json parsed;
  try {
    parsed = Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  ConfigDocument doc;
  doc.merge(parsed);
  return doc;
}

ConfigDocument ConfigDocument::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

void ConfigDocument::merge(const Json& overrides) { merge_into(doc_, overrides, ""); }

void ConfigDocument::set(const std::string& dotted_key, const std::string& value) {
  auto dot = dotted_key.find('.');
  if (dot == std::string::npos)
    throw Error(ErrorCode::kInvalidConfig, "expected section.key, got '" + dotted_key + "'");
  Json v;
  try {
    v = Json::parse(value);
  } catch (const Json::parse_error&) {
    v = value;  // bare word
  }
  merge({{dotted_key.substr(0, dot), {{dotted_key.substr(dot + 1), v}}}});
}

void ConfigDocument::apply_env(char** environ_ptr) {
  if (environ_ptr == nullptr) return;
  const std::string prefix = "EDGEDEM_";
  std::vector<std::pair<std::string, std::string>> found;
  for (char** e = environ_ptr; *e != nullptr; ++e) {
    std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(prefix.size(), eq - prefix.size());
    auto sep = name.find('_');
    if (sep == std::string::npos || sep == 0 || sep + 1 == name.size())
      throw Error(ErrorCode::kInvalidConfig, "malformed override variable " + entry.substr(0, eq));
    found.emplace_back(lower(name.substr(0, sep)) + "." + lower(name.substr(sep + 1)),
                       entry.substr(eq + 1));
  }
  std::sort(found.begin(), found.end());  // environment order is unspecified
  for (const auto& [key, value] : found) set(key, value);
}

ExperimentConfig ConfigDocument::build() const {
  const Json& d = doc_;
  ExperimentConfig c;

  auto& r = c.radio;
  r.bandwidth_total_hz = get<double>(d, "radio", "bandwidth_total_hz");
  r.num_subbands = get_int(d, "radio", "num_subbands");
  r.rb_bandwidth_hz = get<double>(d, "radio", "rb_bandwidth_hz");
  r.subbands_per_sbs = get<std::vector<int>>(d, "radio", "subbands_per_sbs");
  r.tx_power_dbm = get<double>(d, "radio", "tx_power_dbm");
  r.noise_psd_dbm_hz = get<double>(d, "radio", "noise_psd_dbm_hz");
  r.shadowing_std_db = get<double>(d, "radio", "shadowing_std_db");
  r.pathloss_a_db = get<double>(d, "radio", "pathloss_a_db");
  r.pathloss_b_db = get<double>(d, "radio", "pathloss_b_db");
  r.network_radius_m = get<double>(d, "radio", "network_radius_m");
  r.ue_min_dist_m = get<double>(d, "radio", "ue_min_dist_m");

  c.network.num_ues = get_int(d, "network", "num_ues");
  c.network.num_sbs = get_int(d, "network", "num_sbs");
  c.network.quotas = get<std::vector<int>>(d, "network", "quotas");
  c.network.virtual_rate_bps = get<double>(d, "network", "virtual_rate_bps");

  c.budget.global_accuracy = get<double>(d, "budget", "global_accuracy");
  c.budget.local_accuracy = get<double>(d, "budget", "local_accuracy");
  c.budget.task_constant = get<double>(d, "budget", "task_constant");
  c.budget.default_local_constant = get<double>(d, "budget", "local_constant");

  auto& p = c.compute;
  p.cycles_min = get<double>(d, "compute", "cycles_min");
  p.cycles_max = get<double>(d, "compute", "cycles_max");
  p.f_min_hz = get<double>(d, "compute", "f_min_hz");
  p.f_max_lo_hz = get<double>(d, "compute", "f_max_lo_hz");
  p.f_max_hi_hz = get<double>(d, "compute", "f_max_hi_hz");
  auto dist = get<std::string>(d, "compute", "model_size_dist");
  if (dist == "uniform")
    p.model_size_dist = latency::ModelSizeDist::kUniform;
  else if (dist == "lognormal")
    p.model_size_dist = latency::ModelSizeDist::kLogNormal;
  else
    throw Error(ErrorCode::kInvalidConfig, "compute.model_size_dist must be uniform or lognormal");
  p.model_kb_min = get<double>(d, "compute", "model_kb_min");
  p.model_kb_max = get<double>(d, "compute", "model_kb_max");
  p.model_kb_median = get<double>(d, "compute", "model_kb_median");
  p.model_kb_sigma = get<double>(d, "compute", "model_kb_sigma");
  p.data_min = get<double>(d, "compute", "data_min");
  p.data_max = get<double>(d, "compute", "data_max");

  c.alloc.tolerance_s = get<double>(d, "alloc", "tolerance_s");
  c.alloc.max_steps = get_int(d, "alloc", "max_steps");

  c.matching.scheme = parse_matching_scheme(get<std::string>(d, "matching", "scheme"));
  c.matching.preference_refresh = get_int(d, "matching", "preference_refresh");

  auto& l = c.learning;
  l.scheme = parse_learning_scheme(get<std::string>(d, "train", "scheme"));
  auto model = get<std::string>(d, "train", "model");
  if (model == "logistic")
    l.model = learn::ModelKind::kLogistic;
  else if (model == "mlp")
    l.model = learn::ModelKind::kMlp;
  else
    throw Error(ErrorCode::kInvalidConfig, "train.model must be logistic or mlp");
  l.hidden = get_int(d, "train", "hidden");
  l.train.learning_rate = get<double>(d, "train", "learning_rate");
  l.train.eta = get<double>(d, "train", "eta");
  l.train.tau = get_int(d, "train", "tau");
  l.train.local_epochs = get_int(d, "train", "local_epochs");
  l.train.batch_size = get_int(d, "train", "batch_size");
  l.train.rounds = get_int(d, "train", "rounds");
  auto reg = get<std::string>(d, "train", "regularizer");
  if (reg == "none")
    l.train.regularizer = learn::Regularizer::kNone;
  else if (reg == "l1")
    l.train.regularizer = learn::Regularizer::kL1;
  else if (reg == "l2")
    l.train.regularizer = learn::Regularizer::kL2;
  else
    throw Error(ErrorCode::kInvalidConfig, "train.regularizer must be none, l1 or l2");
  l.num_groups = get_int(d, "train", "num_groups");
  auto linkage = get<std::string>(d, "train", "linkage");
  if (linkage == "single")
    l.linkage = learn::Linkage::kSingle;
  else if (linkage == "complete")
    l.linkage = learn::Linkage::kComplete;
  else if (linkage == "average")
    l.linkage = learn::Linkage::kAverage;
  else
    throw Error(ErrorCode::kInvalidConfig, "train.linkage must be single, complete or average");
  auto features = get<std::string>(d, "train", "cluster_features");
  if (features == "weights")
    l.cluster_features = ClusterFeatures::kWeights;
  else if (features == "weights+grads")
    l.cluster_features = ClusterFeatures::kWeightsAndGrads;
  else
    throw Error(ErrorCode::kInvalidConfig, "train.cluster_features must be weights or weights+grads");
  l.init_scale = get<double>(d, "train", "init_scale");

  auto& ds = c.data;
  auto source = get<std::string>(d, "data", "source");
  if (source == "synthetic")
    ds.source = DataSource::kSynthetic;
  else if (source == "idx")
    ds.source = DataSource::kIdx;
  else
    throw Error(ErrorCode::kInvalidConfig, "data.source must be synthetic or idx");
  ds.synth.num_classes = get_int(d, "data", "num_classes");
  ds.synth.input_dim = get_int(d, "data", "input_dim");
  ds.synth.num_samples = get_int(d, "data", "num_samples");
  ds.synth.class_scale = get<double>(d, "data", "class_scale");
  ds.synth.spread = get<double>(d, "data", "spread");
  ds.synth.test_fraction = get<double>(d, "data", "test_fraction");
  ds.partition.labels_per_ue = get_int(d, "data", "labels_per_ue");
  ds.partition.samples_min = get<double>(d, "data", "samples_min");
  ds.partition.samples_max = get<double>(d, "data", "samples_max");
  ds.partition.test_ratio = get<double>(d, "data", "test_ratio");
  ds.idx_images = get<std::string>(d, "data", "idx_images");
  ds.idx_labels = get<std::string>(d, "data", "idx_labels");
  ds.idx_test_images = get<std::string>(d, "data", "idx_test_images");
  ds.idx_test_labels = get<std::string>(d, "data", "idx_test_labels");

  auto& run = c.run;
  const Json& seed = d.at("experiment").at("seed");
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0))
    throw Error(ErrorCode::kInvalidConfig, "experiment.seed must be a non-negative integer");
  run.seed = seed.get<std::uint64_t>();
  run.replications = get_int(d, "experiment", "replications");
  run.workers = get_int(d, "experiment", "workers");
  run.trace_matching = get<bool>(d, "experiment", "trace_matching");
  run.sweep_ues = get<std::vector<int>>(d, "experiment", "sweep_ues");
  run.sweep_sbs = get<std::vector<int>>(d, "experiment", "sweep_sbs");
  run.sweep_schemes = get<std::vector<std::string>>(d, "experiment", "sweep_schemes");
  run.bench_ues = get<std::vector<int>>(d, "experiment", "bench_ues");
  run.bench_sbs = get_int(d, "experiment", "bench_sbs");
  run.bench_instances = get_int(d, "experiment", "bench_instances");
  run.snapshot_rounds = get<std::vector<int>>(d, "experiment", "snapshot_rounds");

  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (network.num_ues < 1 || network.num_sbs < 1) fail("network needs at least one UE and one SBS");
  radio.validate(network.num_sbs);
  if (!network.quotas.empty() && network.quotas.size() != static_cast<std::size_t>(network.num_sbs))
    fail("network.quotas needs one entry per SBS");
  for (int q : network.quotas)
    if (q < 0) fail("quotas must be non-negative");
  try {
    latency::iters_global(budget);
    latency::iters_local(budget, 0);
  } catch (const Error& e) {
    fail(std::string("budget: ") + e.what());
  }
  compute.validate();
  if (!(alloc.tolerance_s > 0.0) || alloc.max_steps < 1) fail("alloc tolerance and steps must be positive");
  if (matching.preference_refresh < 1) fail("matching.preference_refresh must be >= 1");
  learning.train.validate();
  if (learning.scheme == LearningScheme::kDemLearn &&
      (learning.num_groups < 1 || learning.num_groups > network.num_ues))
    fail("train.num_groups must lie in [1, num_ues]");
  if (learning.hidden < 1) fail("train.hidden must be positive");
  if (!(learning.init_scale >= 0.0)) fail("train.init_scale must be non-negative");
  if (data.synth.num_classes < 2) fail("data.num_classes must be >= 2");
  if (data.source == DataSource::kSynthetic && data.synth.input_dim < data.synth.num_classes)
    fail("data.input_dim must be >= num_classes");
  if (data.synth.num_samples < 1) fail("data.num_samples must be positive");
  if (data.source == DataSource::kIdx && (data.idx_images.empty() || data.idx_labels.empty()))
    fail("idx data source needs data.idx_images and data.idx_labels");
  if (run.replications < 1) fail("experiment.replications must be >= 1");
  if (run.workers < 0) fail("experiment.workers must be >= 0");
  for (const auto& s : run.sweep_schemes) parse_matching_scheme(s);
  if (run.bench_sbs < 1 || run.bench_instances < 1) fail("bench sizes must be positive");
}

}  // namespace edgedem
