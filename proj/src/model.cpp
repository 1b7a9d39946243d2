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

#include "edgedem/model.hpp"

#include <algorithm>
#include <cmath>

#include "edgedem/error.hpp"

namespace edgedem::learn {

ModelLayout ModelLayout::logistic(int input_dim, int num_classes) {
  if (input_dim < 1 || num_classes < 2)
    throw Error(ErrorCode::kInvalidArgument, "logistic model needs input_dim >= 1, classes >= 2");
  ModelLayout l;
  l.kind = ModelKind::kLogistic;
  l.input_dim = input_dim;
  l.num_classes = num_classes;
  auto in = static_cast<std::size_t>(input_dim), c = static_cast<std::size_t>(num_classes);
  l.slices = {{"weight", 0, c, in}, {"bias", c * in, c, 1}};
  l.size = c * in + c;
  return l;
}

ModelLayout ModelLayout::mlp(int input_dim, int hidden, int num_classes) {
  if (input_dim < 1 || hidden < 1 || num_classes < 2)
    throw Error(ErrorCode::kInvalidArgument, "MLP needs positive sizes and >= 2 classes");
  ModelLayout l;
  l.kind = ModelKind::kMlp;
  l.input_dim = input_dim;
  l.hidden = hidden;
  l.num_classes = num_classes;
  auto in = static_cast<std::size_t>(input_dim), h = static_cast<std::size_t>(hidden),
       c = static_cast<std::size_t>(num_classes);
  std::size_t off = 0;
  l.slices.push_back({"hidden.weight", off, h, in});
  off += h * in;
  l.slices.push_back({"hidden.bias", off, h, 1});
  off += h;
  l.slices.push_back({"out.weight", off, c, h});
  off += c * h;
  l.slices.push_back({"out.bias", off, c, 1});
  l.size = off + c;
  return l;
}

nlohmann::json ModelLayout::to_json() const {
  nlohmann::json doc;
  doc["kind"] = kind == ModelKind::kLogistic ? "logistic" : "mlp";
  doc["input_dim"] = input_dim;
  doc["num_classes"] = num_classes;
  if (kind == ModelKind::kMlp) doc["hidden"] = hidden;
  doc["size"] = size;
  auto& layers = doc["layers"] = nlohmann::json::array();
  for (const auto& s : slices)
    layers.push_back({{"name", s.name}, {"offset", s.offset}, {"shape", {s.rows, s.cols}}});
  return doc;
}

Classifier::Classifier(ModelLayout layout) : layout_(std::move(layout)) {}

Weights Classifier::init(Rng& rng, double scale) const {
  Weights w(layout_.size);
  for (double& x : w) x = scale * rng.normal();
  return w;
}

void Classifier::forward(std::span<const double> w, std::span<const double> x,
                         std::vector<double>& logits, std::vector<double>& hidden) const {
  const auto c = static_cast<std::size_t>(layout_.num_classes);
  std::span<const double> features = x;
  std::size_t out_w = 0;
  if (layout_.kind == ModelKind::kMlp) {
    const auto& hw = layout_.slices[0];
    const auto& hb = layout_.slices[1];
    hidden.assign(hw.rows, 0.0);
    for (std::size_t j = 0; j < hw.rows; ++j) {
      double z = w[hb.offset + j];
      const double* row = w.data() + hw.offset + j * hw.cols;
      for (std::size_t i = 0; i < hw.cols; ++i) z += row[i] * x[i];
      hidden[j] = std::tanh(z);
    }
    features = hidden;
    out_w = 2;
  }
  const auto& ow = layout_.slices[out_w];
  const auto& ob = layout_.slices[out_w + 1];
  logits.assign(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    double z = w[ob.offset + k];
    const double* row = w.data() + ow.offset + k * ow.cols;
    for (std::size_t i = 0; i < ow.cols; ++i) z += row[i] * features[i];
    logits[k] = z;
  }
}

double Classifier::sample(std::span<const double> w, std::span<const double> x, int label,
                          std::span<double> grad, double grad_scale, std::vector<double>& logits,
                          std::vector<double>& hidden) const {
  forward(w, x, logits, hidden);
  const auto c = logits.size();
  double top = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  for (double z : logits) norm += std::exp(z - top);
  const double log_norm = top + std::log(norm);
  const double loss = log_norm - logits[static_cast<std::size_t>(label)];
  if (grad.empty()) return loss;

  // dL/dz_k = softmax_k - [k == label]
  std::vector<double>& delta = logits;
  for (std::size_t k = 0; k < c; ++k) delta[k] = std::exp(delta[k] - log_norm);
  delta[static_cast<std::size_t>(label)] -= 1.0;

  const bool mlp = layout_.kind == ModelKind::kMlp;
  std::span<const double> features = mlp ? std::span<const double>(hidden) : x;
  const auto& ow = layout_.slices[mlp ? 2 : 0];
  const auto& ob = layout_.slices[mlp ? 3 : 1];
  for (std::size_t k = 0; k < c; ++k) {
    double d = grad_scale * delta[k];
    grad[ob.offset + k] += d;
    double* row = grad.data() + ow.offset + k * ow.cols;
    for (std::size_t i = 0; i < ow.cols; ++i) row[i] += d * features[i];
  }
  if (mlp) {
    const auto& hw = layout_.slices[0];
    const auto& hb = layout_.slices[1];
    for (std::size_t j = 0; j < hw.rows; ++j) {
      double back = 0.0;
      for (std::size_t k = 0; k < c; ++k) back += delta[k] * w[ow.offset + k * ow.cols + j];
      double d = grad_scale * back * (1.0 - hidden[j] * hidden[j]);
      grad[hb.offset + j] += d;
      double* row = grad.data() + hw.offset + j * hw.cols;
      for (std::size_t i = 0; i < hw.cols; ++i) row[i] += d * x[i];
    }
  }
  return loss;
}

double Classifier::cross_entropy(std::span<const double> w, const data::Dataset& data,
                                 std::span<const std::size_t> rows, std::span<double> grad) const {
  if (w.size() != layout_.size) throw Error(ErrorCode::kInvalidArgument, "weight size mismatch");
  if (!grad.empty() && grad.size() != layout_.size)
    throw Error(ErrorCode::kInvalidArgument, "gradient size mismatch");
  const std::size_t count = rows.empty() ? data.size() : rows.size();
  if (count == 0) throw Error(ErrorCode::kEmptyDataset, "cross-entropy of an empty dataset");
  const double scale = 1.0 / static_cast<double>(count);
  std::vector<double> logits, hidden;
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t r = rows.empty() ? k : rows[k];
    total += sample(w, data.features.row(r), data.labels[r], grad, scale, logits, hidden);
  }
  return total * scale;
}

int Classifier::predict(std::span<const double> w, std::span<const double> x) const {
  std::vector<double> logits, hidden;
  forward(w, x, logits, hidden);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double Classifier::accuracy(std::span<const double> w, const data::Dataset& data) const {
  if (data.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < data.size(); ++r)
    if (predict(w, data.features.row(r)) == data.labels[r]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

nlohmann::json checkpoint_json(const ModelLayout& layout, std::span<const double> w) {
  if (w.size() != layout.size) throw Error(ErrorCode::kInvalidArgument, "weight size mismatch");
  return {{"layout", layout.to_json()}, {"weights", std::vector<double>(w.begin(), w.end())}};
}

Weights weights_from_checkpoint(const nlohmann::json& doc, const ModelLayout& layout) {
  Weights w;
  try {
    w = doc.at("weights").get<Weights>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed checkpoint: ") + e.what());
  }
  if (w.size() != layout.size) throw Error(ErrorCode::kInvalidArgument, "checkpoint does not match the layout");
  for (double x : w)
    if (!std::isfinite(x)) throw Error(ErrorCode::kDivergence, "checkpoint holds a non-finite weight");
  return w;
}

}  // namespace edgedem::learn
