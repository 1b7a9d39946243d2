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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "edgedem/data.hpp"
#include "edgedem/demlearn.hpp"
#include "edgedem/error.hpp"
#include "edgedem/model.hpp"
#include "oracles.hpp"

using namespace edgedem;
using namespace edgedem::learn;

namespace {

data::Dataset small_data(std::uint64_t seed, int classes = 4, int dim = 6, int samples = 60) {
  data::SynthConfig c;
  c.num_classes = classes;
  c.input_dim = dim;
  c.num_samples = samples;
  c.test_fraction = 0.0;
  c.class_scale = 1.5;
  return data::synth_dataset(c, seed);
}

GroupTree tree_of(std::vector<int> group_of, std::vector<Weights> personal) {
  GroupTree t;
  t.num_groups = *std::max_element(group_of.begin(), group_of.end()) + 1;
  t.group_of = std::move(group_of);
  t.personal = std::move(personal);
  return t;
}

std::vector<Weights> random_models(int n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Weights> out(static_cast<std::size_t>(n), Weights(dim));
  for (auto& w : out)
    for (double& x : w) x = rng.normal();
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

}  // namespace

TEST_SUITE("demlearn") {

TEST_CASE("local loss") {
  auto d = small_data(1);
  Classifier model(ModelLayout::logistic(6, 4));
  Weights zero(model.num_params(), 0.0);
  CHECK(local_loss(model, zero, d, 0.0, Regularizer::kNone) == doctest::Approx(std::log(4.0)).epsilon(1e-14));

  Weights w = random_models(1, model.num_params(), 2)[0];
  double l1 = 0.0, l2 = 0.0;
  for (double x : w) {
    l1 += std::abs(x);
    l2 += x * x;
  }
  double ce = oracle::logistic_ce(w, d);
  CHECK(std::abs(local_loss(model, w, d, 0.0, Regularizer::kL2) - ce) < 1e-10);
  CHECK(std::abs(local_loss(model, w, d, 0.01, Regularizer::kL1) - (ce + 0.01 * l1)) < 1e-10);
  CHECK(std::abs(local_loss(model, w, d, 0.01, Regularizer::kL2) - (ce + 0.01 * l2)) < 1e-10);
  // Uniform classifier with a regularizer: ln C + eta * R(0) = ln C.
  CHECK(local_loss(model, zero, d, 0.5, Regularizer::kL2) == doctest::Approx(std::log(4.0)));

  data::Dataset empty = d.subset(std::vector<std::size_t>{});
  CHECK(code_of([&] { local_loss(model, w, empty, 0.0, Regularizer::kNone); }) == ErrorCode::kEmptyDataset);
}

TEST_CASE("personalized objective") {
  auto d = small_data(3);
  Classifier model(ModelLayout::logistic(6, 4));
  const std::size_t p = model.num_params();
  Weights w = random_models(1, p, 4)[0];
  auto tree = tree_of({0, 0, 1}, {w, w, w});
  tree.group_models = {w, w};
  tree.regional = w;
  const double data_term = local_loss(model, w, d, 0.0, Regularizer::kNone);
  CHECK(personalized_objective(model, w, d, tree, 0, 0.001) == data_term);

  // Group of two at squared distance 4, regional at distance 0.
  Weights moved = w;
  moved[0] += 2.0;
  tree.group_models[0] = moved;
  CHECK(personalized_objective(model, w, d, tree, 0, 0.001) - data_term == doctest::Approx(0.002).epsilon(1e-9));

  // The same offset in a singleton group weighs twice as much.
  tree.group_models[1] = moved;
  double pair = personalized_objective(model, w, d, tree, 0, 0.001) - data_term;
  double single = personalized_objective(model, w, d, tree, 2, 0.001) - data_term;
  CHECK(single > pair);
  CHECK(single == doctest::Approx(2 * pair));

  GroupTree bare = tree_of({0}, {w});
  CHECK(code_of([&] { personalized_objective(model, w, d, bare, 0, 0.001); }) == ErrorCode::kMissingAncestor);
  CHECK(code_of([&] { personalized_objective(model, w, d, tree, 7, 0.001); }) == ErrorCode::kMissingAncestor);
}

TEST_CASE("analytic gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto d = small_data(seed);
    for (auto layout : {ModelLayout::logistic(6, 4), ModelLayout::mlp(6, 5, 4)}) {
      Classifier model(layout);
      const std::size_t p = model.num_params();
      auto ws = random_models(4, p, seed * 10);
      for (auto& w : ws)
        for (double& x : w) x *= 0.3;
      auto tree = tree_of({0, 1, 0}, {ws[0], ws[1], ws[2]});
      tree.group_models = {ws[1], ws[2]};
      tree.regional = ws[3];
      Rng pick(seed);
      std::vector<std::size_t> coords;
      for (int k = 0; k < 20; ++k) coords.push_back(static_cast<std::size_t>(pick.below(p)));
      for (double eta : {0.0, 0.001, 0.5}) {
        Weights grad(p, 0.0);
        personalized_objective(model, ws[0], d, tree, 0, eta, Regularizer::kNone, grad);
        auto f = [&](const std::vector<double>& x) { return personalized_objective(model, x, d, tree, 0, eta); };
        CHECK(oracle::fd_max_rel_error(f, ws[0], grad, coords) <= 1e-4);
      }
    }
  }
}

TEST_CASE("local training") {
  auto d = small_data(5);
  Classifier model(ModelLayout::logistic(6, 4));
  const std::size_t p = model.num_params();
  Weights w = random_models(1, p, 6)[0];
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  Rng rng(1);
  CHECK(local_train(model, w, d, nullptr, 0, cfg, rng) == w);

  // One full-batch step: the proximal part moves w toward its group model by
  // 2 * eta * lr / N_g of the gap, on top of the data step.
  Weights target = w;
  for (double& x : target) x += 1.0;
  auto tree = tree_of({0, 0}, {w, w});
  tree.group_models = {target};
  tree.regional = w;
  cfg.learning_rate = 0.05;
  cfg.eta = 0.3;
  cfg.batch_size = 1000;
  cfg.local_epochs = 1;
  Rng r1(2), r2(2);
  auto with = local_train(model, w, d, &tree, 0, cfg, r1);
  auto without = local_train(model, w, d, nullptr, 0, cfg, r2);
  const double frac = 2.0 * cfg.eta * cfg.learning_rate / 2.0;
  for (std::size_t i = 0; i < p; ++i) CHECK(with[i] - without[i] == doctest::Approx(frac * 1.0).epsilon(1e-9));

  // Same stream, same result.
  Rng a(3), b(3);
  cfg.batch_size = 8;
  cfg.local_epochs = 3;
  CHECK(local_train(model, w, d, &tree, 0, cfg, a) == local_train(model, w, d, &tree, 0, cfg, b));

  // A non-finite loss is reported.
  Weights broken = w;
  broken[0] = std::nan("");
  Rng c(4);
  CHECK(code_of([&] { local_train(model, broken, d, nullptr, 0, cfg, c); }) == ErrorCode::kDivergence);
  data::Dataset empty = d.subset(std::vector<std::size_t>{});
  CHECK(code_of([&] { local_train(model, w, empty, nullptr, 0, cfg, c); }) == ErrorCode::kEmptyDataset);
}

TEST_CASE("proximal pull shrinks the weighted distance") {
  Weights w = {1.0, -2.0, 0.5};
  auto tree = tree_of({0, 0, 0}, {w, w, w});
  tree.group_models = {{0.0, 0.0, 0.0}};
  tree.regional = {1.0, 1.0, 1.0};
  auto weighted = [&](const Weights& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      s += (std::pow(x[i] - tree.group_models[0][i], 2) + std::pow(x[i] - tree.regional[i], 2)) / 3.0;
    return s;
  };
  Weights step = w;
  const double eta = 0.01, lr = 0.1;
  for (std::size_t i = 0; i < 3; ++i)
    step[i] -= lr * 2.0 * eta / 3.0 * ((w[i] - tree.group_models[0][i]) + (w[i] - tree.regional[i]));
  CHECK(weighted(step) < weighted(w));
}

TEST_CASE("hierarchical averaging") {
  auto same = tree_of({0, 0, 1}, {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
  hierarchical_average(same);
  CHECK(same.regional == Weights{1.0, 2.0});
  CHECK(same.group_models[1] == Weights{1.0, 2.0});

  auto pair = tree_of({0, 1}, {{0.0}, {2.0}});
  hierarchical_average(pair);
  CHECK(pair.regional[0] == doctest::Approx(1.0));

  // Unequal groups: level-2 weights follow group sizes.
  auto uneven = tree_of({0, 0, 0, 1}, {{0.0}, {3.0}, {6.0}, {10.0}});
  hierarchical_average(uneven);
  CHECK(uneven.group_models[0][0] == doctest::Approx(3.0));
  CHECK(uneven.regional[0] == doctest::Approx(0.75 * 3.0 + 0.25 * 10.0));

  // One group over everyone equals FedAvg with equal sizes.
  auto models = random_models(5, 4, 9);
  auto all = tree_of({0, 0, 0, 0, 0}, models);
  hierarchical_average(all);
  auto fed = fedavg_round(models, std::vector<double>(5, 1.0));
  for (std::size_t i = 0; i < 4; ++i) CHECK(all.regional[i] == doctest::Approx(fed[i]).epsilon(1e-14));

  auto gap = tree_of({0, 2}, {{0.0}, {1.0}});
  CHECK(code_of([&] { hierarchical_average(gap); }) == ErrorCode::kEmptyGroup);
}

TEST_CASE("averaging commutes with affine maps") {
  auto models = random_models(6, 3, 11);
  auto tree = tree_of({0, 1, 1, 2, 0, 1}, models);
  hierarchical_average(tree);
  auto mapped = models;
  for (auto& w : mapped)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 2.5 * w[i] - 1.0 + static_cast<double>(i);
  auto tree2 = tree_of(tree.group_of, mapped);
  hierarchical_average(tree2);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tree2.regional[i] == doctest::Approx(2.5 * tree.regional[i] - 1.0 + static_cast<double>(i)).epsilon(1e-12));
    CHECK(tree2.group_models[1][i] ==
          doctest::Approx(2.5 * tree.group_models[1][i] - 1.0 + static_cast<double>(i)).epsilon(1e-12));
  }
}

TEST_CASE("partial aggregation across SBSs") {
  auto models = random_models(5, 4, 13);
  auto tree = tree_of({0, 0, 0, 0, 0}, models);
  // Group split 2/3 over two SBSs.
  std::vector<int> serving = {0, 1, 0, 1, 1};
  auto p0 = partial_group_aggregate(0, serving, tree);
  auto p1 = partial_group_aggregate(1, serving, tree);
  REQUIRE(p0.size() == 1);
  CHECK(p0[0].count == 2);
  CHECK(p1[0].count == 3);
  CHECK(partial_group_aggregate(2, serving, tree).empty());
  std::vector<std::vector<PartialSum>> parts = {p0, p1};
  combine_partials(parts, tree);
  for (std::size_t i = 0; i < 4; ++i) {
    double direct = 0.0;
    for (const auto& m : models) direct += m[i] / 5.0;
    CHECK(std::abs(tree.regional[i] - direct) < 1e-12);
  }

  // Whole group at one point: partial sum is the full sum.
  std::vector<int> one(5, kVirtualNode);
  auto full = partial_group_aggregate(kVirtualNode, one, tree);
  REQUIRE(full.size() == 1);
  CHECK(full[0].count == 5);

  // Missing members are caught.
  std::vector<std::vector<PartialSum>> short_parts = {p0};
  CHECK(code_of([&] { combine_partials(short_parts, tree); }) == ErrorCode::kEmptyGroup);
}

TEST_CASE("regional objective") {
  auto d0 = small_data(21), d1 = small_data(22);
  Classifier model(ModelLayout::logistic(6, 4));
  auto models = random_models(4, model.num_params(), 23);
  auto tree = tree_of({0, 0, 1, 1}, models);
  hierarchical_average(tree);
  std::vector<data::Dataset> groups = {d0, d1};
  double expected = 0.0;
  for (std::size_t g = 0; g < 2; ++g) {
    double dist = 0.0;
    for (std::size_t i = 0; i < tree.regional.size(); ++i)
      dist += std::pow(tree.group_models[g][i] - tree.regional[i], 2);
    expected += 0.5 * (oracle::logistic_ce(tree.group_models[g], groups[g]) + 0.5 * 0.1 * dist);
  }
  CHECK(regional_objective(model, tree, groups, 0.1) == doctest::Approx(expected).epsilon(1e-12));

  // Level-1 models equal to the regional one: proximal terms vanish.
  tree.group_models = {tree.regional, tree.regional};
  double plain = 0.5 * oracle::logistic_ce(tree.regional, d0) + 0.5 * oracle::logistic_ce(tree.regional, d1);
  CHECK(regional_objective(model, tree, groups, 5.0) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("reclustering") {
  // Brute-force best 2-partition by within-cluster sum of squares.
  auto best_split = [](const std::vector<Weights>& pts) {
    const int n = static_cast<int>(pts.size());
    double best = 1e300;
    std::vector<int> arg;
    for (int mask = 1; mask < (1 << n) - 1; ++mask) {
      if (mask & 1) continue;  // UE 0 always in group 0
      double cost = 0.0;
      for (int side = 0; side < 2; ++side) {
        std::vector<double> mean(pts[0].size(), 0.0);
        int cnt = 0;
        for (int i = 0; i < n; ++i)
          if (((mask >> i) & 1) == side) {
            ++cnt;
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += pts[static_cast<std::size_t>(i)][k];
          }
        for (double& m : mean) m /= cnt;
        for (int i = 0; i < n; ++i)
          if (((mask >> i) & 1) == side)
            for (std::size_t k = 0; k < mean.size(); ++k)
              cost += std::pow(pts[static_cast<std::size_t>(i)][k] - mean[k], 2);
      }
      if (cost < best) {
        best = cost;
        arg.assign(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) arg[static_cast<std::size_t>(i)] = (mask >> i) & 1;
      }
    }
    return arg;
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto pts = random_models(8, 3, seed);
    Rng rng(seed + 100);
    for (auto& p : pts) {
      const double shift = rng.uniform() < 0.5 ? 0.0 : 50.0;
      for (double& x : p) x = 0.1 * x + shift;
    }
    pts[0][0] = 0.0;  // keep both sides populated
    pts[7][0] = 50.0;
    auto expected = best_split(pts);
    for (auto linkage : {Linkage::kSingle, Linkage::kComplete, Linkage::kAverage}) {
      auto c = recluster(pts, 2, linkage);
      CHECK(c.group_of == expected);
      CHECK(c.dendrogram.size() == 7);
      for (std::size_t k = 1; k < c.dendrogram.size(); ++k)
        CHECK(c.dendrogram[k].height >= c.dendrogram[k - 1].height - 1e-12);
    }
  }

  auto pts = random_models(5, 2, 31);
  auto singletons = recluster(pts, 5, Linkage::kAverage);
  CHECK(singletons.group_of == std::vector<int>{0, 1, 2, 3, 4});
  auto one = recluster(pts, 1, Linkage::kAverage);
  CHECK(one.group_of == std::vector<int>(5, 0));
  CHECK(one.dendrogram.back().size == 5);

  // Ties go to the lowest indices.
  std::vector<Weights> line = {{0.0}, {1.0}, {2.0}, {3.0}};
  auto tie = recluster(line, 3, Linkage::kSingle);
  CHECK(tie.group_of == std::vector<int>{0, 0, 1, 2});
  CHECK(tie.dendrogram[0].left == 0);
  CHECK(tie.dendrogram[0].right == 1);
  CHECK(tie.to_json()["merges"].size() == 3);

  CHECK(code_of([&] { recluster(line, 0, Linkage::kSingle); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { recluster(line, 5, Linkage::kSingle); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("FedAvg") {
  CHECK(fedavg_round(std::vector<Weights>{{0.0}, {4.0}}, std::vector<double>{1.0, 3.0})[0] == doctest::Approx(3.0));
  CHECK(fedavg_round(std::vector<Weights>{{2.0, 5.0}}, std::vector<double>{7.0}) == Weights{2.0, 5.0});
  auto eq = fedavg_round(std::vector<Weights>{{1.0}, {2.0}, {6.0}}, std::vector<double>{2.0, 2.0, 2.0});
  CHECK(eq[0] == doctest::Approx(3.0));
  CHECK(code_of([] { fedavg_round(std::vector<Weights>{}, std::vector<double>{}); }) == ErrorCode::kEmptyGroup);
}

TEST_CASE("mean pairwise distance") {
  std::vector<Weights> pts = {{0.0, 0.0}, {3.0, 4.0}, {0.0, 0.0}};
  CHECK(mean_pairwise_distance(pts) == doctest::Approx((5.0 + 0.0 + 5.0) / 3.0));
  CHECK(mean_pairwise_distance(std::span(pts).first(1)) == 0.0);
}

TEST_CASE("checkpoints round-trip") {
  auto layout = ModelLayout::mlp(4, 3, 2);
  Classifier model(layout);
  Rng rng(5);
  auto w = model.init(rng, 0.5);
  auto doc = checkpoint_json(layout, w);
  CHECK(weights_from_checkpoint(nlohmann::json::parse(doc.dump()), layout) == w);
  CHECK(doc["layout"]["layers"].size() == 4);
  doc["weights"].erase(0);
  CHECK_THROWS_AS(weights_from_checkpoint(doc, layout), Error);
}

}  // TEST_SUITE
