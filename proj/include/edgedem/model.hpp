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

#include <span>
#include <string>
#include <vector>

#include "edgedem/data.hpp"
#include "edgedem/rng.hpp"
#include "json.hpp"

namespace edgedem::learn {

using Weights = std::vector<double>;

enum class ModelKind { kLogistic, kMlp };

// Named slice of the flat parameter vector; matrices are row-major.
struct LayerSlice {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

struct ModelLayout {
  ModelKind kind = ModelKind::kLogistic;
  int input_dim = 0;
  int num_classes = 0;
  int hidden = 0;  // MLP only
  std::vector<LayerSlice> slices;
  std::size_t size = 0;

  static ModelLayout logistic(int input_dim, int num_classes);
  static ModelLayout mlp(int input_dim, int hidden, int num_classes);
  nlohmann::json to_json() const;
};

// Softmax classifier over a flat weight vector: multinomial logistic
// regression, or one tanh hidden layer in front of it.
class Classifier {
 public:
  explicit Classifier(ModelLayout layout);

  const ModelLayout& layout() const { return layout_; }
  std::size_t num_params() const { return layout_.size; }

  // Gaussian draw with the given standard deviation.
  Weights init(Rng& rng, double scale) const;

  // Mean cross-entropy over the rows (all rows when empty). When grad is
  // non-empty the mean gradient is added to it.
  double cross_entropy(std::span<const double> w, const data::Dataset& data,
                       std::span<const std::size_t> rows = {}, std::span<double> grad = {}) const;

  int predict(std::span<const double> w, std::span<const double> x) const;
  // Share of correctly classified rows; 0 for an empty set.
  double accuracy(std::span<const double> w, const data::Dataset& data) const;

 private:
  // Adds the cross-entropy of one sample and optionally its gradient.
  double sample(std::span<const double> w, std::span<const double> x, int label,
                std::span<double> grad, double grad_scale, std::vector<double>& logits,
                std::vector<double>& hidden) const;
  void forward(std::span<const double> w, std::span<const double> x, std::vector<double>& logits,
               std::vector<double>& hidden) const;

  ModelLayout layout_;
};

// Checkpoint: {"layout": ..., "weights": [...]}. Loading checks the length
// against the layout and rejects non-finite values.
nlohmann::json checkpoint_json(const ModelLayout& layout, std::span<const double> w);
Weights weights_from_checkpoint(const nlohmann::json& doc, const ModelLayout& layout);

}  // namespace edgedem::learn
