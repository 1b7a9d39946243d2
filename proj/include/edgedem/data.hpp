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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edgedem/matrix.hpp"
#include "json.hpp"

namespace edgedem::data {

// Labelled samples. Rows [0, train_count) are training data, the rest test.
struct Dataset {
  Matrix features;                // samples x input_dim
  std::vector<int> labels;        // in [0, num_classes)
  std::vector<std::size_t> ids;   // row id in the source pool, for tracing
  int num_classes = 0;
  std::size_t train_count = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t input_dim() const { return features.cols(); }
  std::size_t test_count() const { return size() - train_count; }

  // Copy of the given rows; all of them count as training rows.
  Dataset subset(std::span<const std::size_t> rows) const;
  bool operator==(const Dataset&) const = default;
};

struct SynthConfig {
  int num_classes = 10;
  int input_dim = 20;
  int num_samples = 20000;
  double class_scale = 3.0;  // distance of each class mean from the origin
  double spread = 1.0;       // per-coordinate noise standard deviation
  double test_fraction = 0.2;
};

// Gaussian blobs centred at class_scale * e_c, so input_dim >= num_classes.
Dataset synth_dataset(const SynthConfig& config, std::uint64_t seed);

struct PartitionSpec {
  int labels_per_ue = 2;
  double samples_min = 40.0;  // training samples per UE, log-uniform
  double samples_max = 200.0;
  double test_ratio = 0.25;  // test samples per training sample: a 20% split
  std::uint64_t seed = 0;
};

struct UeShard {
  Dataset train;
  Dataset test;
  std::vector<int> label_set;
};

// Non-IID, unbalanced split: each UE sees only labels_per_ue classes.
// Training rows come from the pool's training side, test rows from its
// test side; no row is handed out twice.
std::vector<UeShard> partition_noniid(const Dataset& pool, int n_ues, const PartitionSpec& spec);

// Reads an IDX image/label archive pair; pixels are scaled to [0, 1] and
// every sample counts as training data.
Dataset load_idx_archive(const std::string& images_path, const std::string& labels_path);

// Concatenation of every UE test shard, de-duplicated by source id.
Dataset build_generalization_pool(std::span<const UeShard> shards);

nlohmann::json manifest(std::span<const UeShard> shards, const PartitionSpec& spec);

}  // namespace edgedem::data
