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

#include "edgedem/demlearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "edgedem/error.hpp"

namespace edgedem::learn {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void add_scaled(std::span<double> into, std::span<const double> from, double k) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += k * from[i];
}

}  // namespace

double local_loss(const Classifier& model, std::span<const double> w, const data::Dataset& data,
                  double eta, Regularizer reg, std::span<double> grad) {
  if (data.size() == 0) throw Error(ErrorCode::kEmptyDataset, "local loss on an empty dataset");
  double loss = model.cross_entropy(w, data, {}, grad);
  if (eta == 0.0 || reg == Regularizer::kNone) return loss;
  double r = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (reg == Regularizer::kL1) {
      r += std::abs(w[i]);
      if (!grad.empty()) grad[i] += eta * (w[i] > 0.0 ? 1.0 : (w[i] < 0.0 ? -1.0 : 0.0));
    } else {
      r += w[i] * w[i];
      if (!grad.empty()) grad[i] += 2.0 * eta * w[i];
    }
  }
  return loss + eta * r;
}

std::vector<int> GroupTree::group_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(num_groups), 0);
  for (int g : group_of) ++sizes.at(static_cast<std::size_t>(g));
  return sizes;
}

std::vector<std::vector<int>> GroupTree::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_groups));
  for (int n = 0; n < num_ues(); ++n)
    out.at(static_cast<std::size_t>(group_of[static_cast<std::size_t>(n)])).push_back(n);
  return out;
}

void GroupTree::validate() const {
  if (num_groups < 1) throw Error(ErrorCode::kEmptyGroup, "tree has no groups");
  for (int g : group_of)
    if (g < 0 || g >= num_groups) throw Error(ErrorCode::kInvalidArgument, "group id out of range");
  for (int size : group_sizes())
    if (size == 0) throw Error(ErrorCode::kEmptyGroup, "a group has no members");
  if (personal.size() != group_of.size())
    throw Error(ErrorCode::kInvalidArgument, "one level-0 model per UE required");
}

double personalized_objective(const Classifier& model, std::span<const double> w,
                              const data::Dataset& data, const GroupTree& tree, int ue, double eta,
                              Regularizer reg, std::span<double> grad) {
  if (!tree.has_ancestors() || ue < 0 || ue >= tree.num_ues())
    throw Error(ErrorCode::kMissingAncestor, "UE has no group or regional model");
  double value = local_loss(model, w, data, eta, reg, grad);
  const int g = tree.group_of[static_cast<std::size_t>(ue)];
  if (g < 0 || static_cast<std::size_t>(g) >= tree.group_models.size())
    throw Error(ErrorCode::kMissingAncestor, "UE group has no model");

  const double n_group = tree.group_sizes()[static_cast<std::size_t>(g)];
  const double n_region = static_cast<double>(tree.num_ues());
  struct Level {
    std::span<const double> model;
    double count;
  };
  const Level levels[] = {{tree.group_models[static_cast<std::size_t>(g)], n_group},
                          {tree.regional, n_region}};
  for (const auto& level : levels) {
    const double k = eta / level.count;
    value += k * squared_distance(w, level.model);
    if (!grad.empty())
      for (std::size_t i = 0; i < w.size(); ++i) grad[i] += 2.0 * k * (w[i] - level.model[i]);
  }
  return value;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !(eta >= 0.0))
    throw Error(ErrorCode::kInvalidConfig, "learning rate and eta must be non-negative");
  if (tau < 1 || local_epochs < 1 || batch_size < 1 || rounds < 1)
    throw Error(ErrorCode::kInvalidConfig, "tau, epochs, batch size and rounds must be >= 1");
}

Weights local_train(const Classifier& model, std::span<const double> w, const data::Dataset& data,
                    const GroupTree* tree, int ue, const TrainConfig& config, Rng& rng) {
  if (data.size() == 0) throw Error(ErrorCode::kEmptyDataset, "UE has no training data");
  Weights current(w.begin(), w.end());
  if (config.learning_rate == 0.0) return current;

  const bool proximal = tree != nullptr && tree->has_ancestors() && config.eta > 0.0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Weights grad(current.size());

  double n_group = 1.0;
  std::span<const double> group_model, regional;
  if (proximal) {
    int g = tree->group_of.at(static_cast<std::size_t>(ue));
    n_group = tree->group_sizes()[static_cast<std::size_t>(g)];
    group_model = tree->group_models[static_cast<std::size_t>(g)];
    regional = tree->regional;
  }
  const double k_group = proximal ? config.eta / n_group : 0.0;
  const double k_region = proximal ? config.eta / tree->num_ues() : 0.0;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::size_t stop = std::min(order.size(), start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      std::span<const std::size_t> rows(order.data() + start, stop - start);
      double loss = model.cross_entropy(current, data, rows, grad);
      if (!std::isfinite(loss))
        throw Error(ErrorCode::kDivergence, "local loss became non-finite");
      if (config.regularizer != Regularizer::kNone && config.eta > 0.0) {
        for (std::size_t i = 0; i < current.size(); ++i)
          grad[i] += config.regularizer == Regularizer::kL2
                         ? 2.0 * config.eta * current[i]
                         : config.eta * (current[i] > 0.0 ? 1.0 : (current[i] < 0.0 ? -1.0 : 0.0));
      }
      if (proximal)
        for (std::size_t i = 0; i < current.size(); ++i)
          grad[i] += 2.0 * k_group * (current[i] - group_model[i]) +
                     2.0 * k_region * (current[i] - regional[i]);
      add_scaled(current, grad, -config.learning_rate);
    }
  }
  for (double x : current)
    if (!std::isfinite(x)) throw Error(ErrorCode::kDivergence, "model weights became non-finite");
  return current;
}

void hierarchical_average(GroupTree& tree) {
  std::vector<int> all(static_cast<std::size_t>(tree.num_ues()), 0);
  auto partial = partial_group_aggregate(0, all, tree);
  std::vector<std::vector<PartialSum>> one{std::move(partial)};
  combine_partials(one, tree);
}

std::vector<PartialSum> partial_group_aggregate(int point, std::span<const int> serving,
                                                const GroupTree& tree) {
  if (serving.size() != tree.group_of.size())
    throw Error(ErrorCode::kInvalidArgument, "serving map must cover every UE");
  std::vector<PartialSum> out;
  std::vector<int> slot(static_cast<std::size_t>(tree.num_groups), -1);
  for (int n = 0; n < tree.num_ues(); ++n) {
    auto ni = static_cast<std::size_t>(n);
    if (serving[ni] != point) continue;
    int g = tree.group_of[ni];
    auto gi = static_cast<std::size_t>(g);
    if (slot[gi] < 0) {
      slot[gi] = static_cast<int>(out.size());
      out.push_back({g, Weights(tree.personal[ni].size(), 0.0), 0});
    }
    auto& p = out[static_cast<std::size_t>(slot[gi])];
    add_scaled(p.sum, tree.personal[ni], 1.0);
    ++p.count;
  }
  std::sort(out.begin(), out.end(),
            [](const PartialSum& a, const PartialSum& b) { return a.group < b.group; });
  return out;
}

void combine_partials(std::span<const std::vector<PartialSum>> partials, GroupTree& tree) {
  tree.validate();
  const std::size_t dim = tree.personal.front().size();
  std::vector<Weights> sums(static_cast<std::size_t>(tree.num_groups), Weights(dim, 0.0));
  std::vector<int> counts(static_cast<std::size_t>(tree.num_groups), 0);
  for (const auto& point : partials)
    for (const auto& p : point) {
      add_scaled(sums.at(static_cast<std::size_t>(p.group)), p.sum, 1.0);
      counts[static_cast<std::size_t>(p.group)] += p.count;
    }
  const auto sizes = tree.group_sizes();
  tree.group_models.assign(static_cast<std::size_t>(tree.num_groups), Weights(dim, 0.0));
  tree.regional.assign(dim, 0.0);
  const double total = tree.num_ues();
  for (std::size_t g = 0; g < sums.size(); ++g) {
    if (counts[g] != sizes[g])
      throw Error(ErrorCode::kEmptyGroup, "partial sums do not cover group " + std::to_string(g));
    // Level 1: children are singletons, weight 1/N_g. Level 2: weight N_g/N.
    for (std::size_t i = 0; i < dim; ++i) tree.group_models[g][i] = sums[g][i] / counts[g];
    add_scaled(tree.regional, tree.group_models[g], counts[g] / total);
  }
}

double regional_objective(const Classifier& model, const GroupTree& tree,
                          std::span<const data::Dataset> group_data, double eta) {
  if (!tree.has_ancestors()) throw Error(ErrorCode::kMissingAncestor, "tree is not aggregated");
  if (group_data.size() != static_cast<std::size_t>(tree.num_groups))
    throw Error(ErrorCode::kInvalidArgument, "one dataset per group required");
  const auto sizes = tree.group_sizes();
  const double total = tree.num_ues();
  double value = 0.0;
  for (std::size_t g = 0; g < group_data.size(); ++g) {
    double j = model.cross_entropy(tree.group_models[g], group_data[g]);
    value += sizes[g] / total *
             (j + 0.5 * eta * squared_distance(tree.group_models[g], tree.regional));
  }
  return value;
}

nlohmann::json Clustering::to_json() const {
  nlohmann::json doc;
  doc["num_groups"] = num_groups;
  doc["group_of"] = group_of;
  auto& merges = doc["merges"] = nlohmann::json::array();
  for (const auto& m : dendrogram)
    merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
  return doc;
}

Clustering recluster(std::span<const Weights> features, int n_groups, Linkage linkage) {
  const int n = static_cast<int>(features.size());
  if (n_groups < 1 || n_groups > n)
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= groups <= number of models");
  const auto un = static_cast<std::size_t>(n);

  Matrix dist(un, un);
  for (std::size_t i = 0; i < un; ++i)
    for (std::size_t j = i + 1; j < un; ++j) {
      dist(i, j) = dist(j, i) = std::sqrt(squared_distance(features[i], features[j]));
      if (!std::isfinite(dist(i, j)))
        throw Error(ErrorCode::kDivergence, "non-finite distance between models");
    }

  // Slot i holds an active cluster; its label is the lowest member index.
  std::vector<bool> active(un, true);
  std::vector<int> size(un, 1), id(un), lowest(un);
  std::iota(id.begin(), id.end(), 0);
  std::iota(lowest.begin(), lowest.end(), 0);
  std::vector<int> owner(un);  // UE -> slot
  std::iota(owner.begin(), owner.end(), 0);

  Clustering result;
  result.num_groups = n_groups;
  std::vector<int> cut_owner;
  if (n_groups == n) cut_owner = owner;

  for (int step = 0; step < n - 1; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < un; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < un; ++j) {
        if (!active[j] || !(dist(i, j) < best)) continue;
        best = dist(i, j);
        bi = i;
        bj = j;
      }
    }
    result.dendrogram.push_back({std::min(id[bi], id[bj]), std::max(id[bi], id[bj]), best,
                                 size[bi] + size[bj]});
    // Lance-Williams update into slot bi.
    for (std::size_t k = 0; k < un; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      double a = dist(bi, k), b = dist(bj, k), merged;
      switch (linkage) {
        case Linkage::kSingle: merged = std::min(a, b); break;
        case Linkage::kComplete: merged = std::max(a, b); break;
        default: merged = (size[bi] * a + size[bj] * b) / (size[bi] + size[bj]); break;
      }
      dist(bi, k) = dist(k, bi) = merged;
    }
    size[bi] += size[bj];
    lowest[bi] = std::min(lowest[bi], lowest[bj]);
    id[bi] = n + step;
    active[bj] = false;
    for (auto& o : owner)
      if (o == static_cast<int>(bj)) o = static_cast<int>(bi);
    if (n - 1 - step == n_groups) cut_owner = owner;
  }
  if (cut_owner.empty()) cut_owner = owner;  // n_groups == 1

  // Number the groups by their lowest member.
  std::vector<int> label(un, -1);
  int next = 0;
  result.group_of.resize(un);
  for (std::size_t u = 0; u < un; ++u) {
    auto slot = static_cast<std::size_t>(cut_owner[u]);
    if (label[slot] < 0) label[slot] = next++;
    result.group_of[u] = label[slot];
  }
  return result;
}

Weights fedavg_round(std::span<const Weights> models, std::span<const double> data_sizes) {
  if (models.empty()) throw Error(ErrorCode::kEmptyGroup, "no models to average");
  if (data_sizes.size() != models.size())
    throw Error(ErrorCode::kInvalidArgument, "one data size per model required");
  double total = std::accumulate(data_sizes.begin(), data_sizes.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidArgument, "data sizes must sum to > 0");
  Weights out(models.front().size(), 0.0);
  for (std::size_t n = 0; n < models.size(); ++n) add_scaled(out, models[n], data_sizes[n] / total);
  return out;
}

double mean_pairwise_distance(std::span<const Weights> models) {
  const std::size_t n = models.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) total += std::sqrt(squared_distance(models[i], models[j]));
  return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

}  // namespace edgedem::learn
