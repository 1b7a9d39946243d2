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

#include "edgedem/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "edgedem/error.hpp"
#include "edgedem/rng.hpp"

namespace edgedem::data {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features = Matrix(rows.size(), input_dim());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto src = features.row(rows[k]);
    std::copy(src.begin(), src.end(), out.features.row(k).begin());
    out.labels.push_back(labels[rows[k]]);
    out.ids.push_back(ids[rows[k]]);
  }
  out.train_count = rows.size();
  return out;
}

Dataset synth_dataset(const SynthConfig& config, std::uint64_t seed) {
  if (config.num_classes < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 classes");
  if (config.input_dim < config.num_classes)
    throw Error(ErrorCode::kInvalidArgument, "input_dim must be at least num_classes");
  if (config.num_samples < 1) throw Error(ErrorCode::kInvalidArgument, "need at least 1 sample");
  if (!(config.test_fraction >= 0.0 && config.test_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "test fraction must lie in [0, 1)");

  Rng rng = Rng::derive(seed, Stream::kData);
  const auto n = static_cast<std::size_t>(config.num_samples);
  const auto dim = static_cast<std::size_t>(config.input_dim);
  Dataset d;
  d.num_classes = config.num_classes;
  d.features = Matrix(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.num_classes)));
    d.labels.push_back(label);
    d.ids.push_back(i);
    auto row = d.features.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] = config.spread * rng.normal();
    row[static_cast<std::size_t>(label)] += config.class_scale;
  }
  d.train_count = n - static_cast<std::size_t>(std::llround(config.test_fraction * n));
  return d;
}

std::vector<UeShard> partition_noniid(const Dataset& pool, int n_ues, const PartitionSpec& spec) {
  const int classes = pool.num_classes;
  if (n_ues < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one UE");
  if (spec.labels_per_ue < 1 || spec.labels_per_ue > classes)
    throw Error(ErrorCode::kInvalidArgument, "labels_per_ue must lie in [1, C]");
  if (!(spec.samples_min >= 1.0 && spec.samples_min <= spec.samples_max))
    throw Error(ErrorCode::kInvalidArgument, "samples range must be positive and ordered");
  if (!(spec.test_ratio >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "test ratio must be non-negative");

  Rng rng = Rng::derive(spec.seed, Stream::kPartition);
  // Per-label queues of unused rows, shuffled once.
  std::vector<std::vector<std::size_t>> train_q(static_cast<std::size_t>(classes));
  std::vector<std::vector<std::size_t>> test_q(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto c = static_cast<std::size_t>(pool.labels[i]);
    (i < pool.train_count ? train_q : test_q)[c].push_back(i);
  }
  for (auto& q : train_q) rng.shuffle(std::span<std::size_t>(q));
  for (auto& q : test_q) rng.shuffle(std::span<std::size_t>(q));

  auto take = [](std::vector<std::size_t>& q, std::size_t k, std::vector<std::size_t>& into) {
    if (q.size() < k)
      throw Error(ErrorCode::kInsufficientSamples, "label pool exhausted during partition");
    into.insert(into.end(), q.end() - static_cast<std::ptrdiff_t>(k), q.end());
    q.resize(q.size() - k);
  };

  std::vector<UeShard> shards;
  std::vector<int> all_labels(static_cast<std::size_t>(classes));
  for (int n = 0; n < n_ues; ++n) {
    std::iota(all_labels.begin(), all_labels.end(), 0);
    rng.shuffle(std::span<int>(all_labels));
    std::vector<int> chosen(all_labels.begin(), all_labels.begin() + spec.labels_per_ue);
    std::sort(chosen.begin(), chosen.end());

    auto total = static_cast<std::size_t>(
        std::llround(rng.log_uniform(spec.samples_min, spec.samples_max)));
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      std::size_t share = total / chosen.size() + (k < total % chosen.size() ? 1 : 0);
      auto c = static_cast<std::size_t>(chosen[k]);
      take(train_q[c], share, train_rows);
      auto n_test = static_cast<std::size_t>(
          std::max<long long>(1, std::llround(spec.test_ratio * static_cast<double>(share))));
      if (spec.test_ratio == 0.0) n_test = 0;
      take(test_q[c], n_test, test_rows);
    }
    UeShard shard;
    shard.train = pool.subset(train_rows);
    shard.test = pool.subset(test_rows);
    shard.test.train_count = 0;
    shard.label_set = std::move(chosen);
    shards.push_back(std::move(shard));
  }
  return shards;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw Error(ErrorCode::kTruncatedFile, "header cut short in " + path);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return in;
}

}  // namespace

Dataset load_idx_archive(const std::string& images_path, const std::string& labels_path) {
  auto img = open_binary(images_path);
  if (read_be32(img, images_path) != 0x00000803)
    throw Error(ErrorCode::kBadMagic, "not an IDX image file: " + images_path);
  std::uint32_t count = read_be32(img, images_path);
  std::uint32_t rows = read_be32(img, images_path);
  std::uint32_t cols = read_be32(img, images_path);

  auto lab = open_binary(labels_path);
  if (read_be32(lab, labels_path) != 0x00000801)
    throw Error(ErrorCode::kBadMagic, "not an IDX label file: " + labels_path);
  std::uint32_t label_count = read_be32(lab, labels_path);
  if (label_count != count)
    throw Error(ErrorCode::kCountMismatch, "image and label counts differ");

  const std::size_t dim = std::size_t{rows} * cols;
  Dataset d;
  d.features = Matrix(count, dim);
  std::vector<unsigned char> buf(dim);
  for (std::size_t i = 0; i < count; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim)))
      throw Error(ErrorCode::kTruncatedFile, "image payload cut short in " + images_path);
    auto row = d.features.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] = buf[j] / 255.0;
  }
  std::vector<unsigned char> labels(count);
  if (!lab.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(count)))
    throw Error(ErrorCode::kTruncatedFile, "label payload cut short in " + labels_path);
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    d.labels.push_back(labels[i]);
    d.ids.push_back(i);
    max_label = std::max<int>(max_label, labels[i]);
  }
  d.num_classes = count == 0 ? 0 : std::max(10, max_label + 1);
  d.train_count = count;
  return d;
}

Dataset build_generalization_pool(std::span<const UeShard> shards) {
  Dataset pool;
  if (shards.empty()) return pool;
  std::size_t total = 0;
  for (const auto& s : shards) total += s.test.size();
  pool.num_classes = shards.front().test.num_classes;
  pool.features = Matrix(total, shards.front().test.input_dim());
  std::unordered_set<std::size_t> seen;
  std::size_t r = 0;
  for (const auto& s : shards) {
    for (std::size_t i = 0; i < s.test.size(); ++i) {
      if (!seen.insert(s.test.ids[i]).second) continue;
      auto src = s.test.features.row(i);
      std::copy(src.begin(), src.end(), pool.features.row(r++).begin());
      pool.labels.push_back(s.test.labels[i]);
      pool.ids.push_back(s.test.ids[i]);
    }
  }
  if (r != total) {
    Matrix trimmed(r, pool.features.cols());
    for (std::size_t i = 0; i < r; ++i) {
      auto src = pool.features.row(i);
      std::copy(src.begin(), src.end(), trimmed.row(i).begin());
    }
    pool.features = std::move(trimmed);
  }
  pool.train_count = 0;
  return pool;
}

nlohmann::json manifest(std::span<const UeShard> shards, const PartitionSpec& spec) {
  nlohmann::json doc;
  doc["seed"] = spec.seed;
  doc["labels_per_ue"] = spec.labels_per_ue;
  doc["samples_range"] = {spec.samples_min, spec.samples_max};
  doc["test_ratio"] = spec.test_ratio;
  auto& ues = doc["ues"] = nlohmann::json::array();
  for (std::size_t n = 0; n < shards.size(); ++n)
    ues.push_back({{"ue", n},
                   {"labels", shards[n].label_set},
                   {"train", shards[n].train.size()},
                   {"test", shards[n].test.size()}});
  return doc;
}

}  // namespace edgedem::data
