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

#include "edgedem/radio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "edgedem/error.hpp"
#include "edgedem/rng.hpp"
#include "edgedem/units.hpp"

namespace edgedem::radio {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void RadioConfig::validate(int num_sbs) const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (!(bandwidth_total_hz > 0) || !(rb_bandwidth_hz > 0) || num_subbands <= 0)
    fail("bandwidths and sub-band count must be positive");
  if (std::abs(rb_bandwidth_hz * num_subbands - bandwidth_total_hz) >
      1e-9 * bandwidth_total_hz)
    fail("rb_bandwidth * num_subbands must equal bandwidth_total");
  if (!(network_radius_m > 0) || !(ue_min_dist_m > 0) ||
      !(network_radius_m > ue_min_dist_m))
    fail("network radius must exceed the positive UE minimum distance");
  if (!(shadowing_std_db >= 0)) fail("shadowing std must be non-negative");
  if (!subbands_per_sbs.empty()) {
    if (static_cast<int>(subbands_per_sbs.size()) != num_sbs)
      fail("subbands_per_sbs must list one entry per SBS");
    long total = 0;
    for (int z : subbands_per_sbs) {
      if (z <= 0) fail("subbands_per_sbs entries must be positive");
      total += z;
    }
    if (total != total_rbs(num_sbs)) fail("subbands_per_sbs must sum to S x num_subbands");
  }
}

int RadioConfig::subbands_of(int sbs) const {
  return subbands_per_sbs.empty() ? num_subbands
                                  : subbands_per_sbs.at(static_cast<std::size_t>(sbs));
}

double RadioConfig::noise_power_w() const {
  return dbm_to_watts(noise_psd_dbm_hz + linear_to_db(rb_bandwidth_hz));
}

double path_loss_db(const RadioConfig& config, double distance_m) {
  return config.pathloss_a_db + config.pathloss_b_db * std::log10(distance_m / 1000.0);
}

namespace {

Point uniform_in_disc(Rng& rng, double radius) {
  double r = radius * std::sqrt(rng.uniform());
  double theta = 2.0 * std::numbers::pi * rng.uniform();
  return {r * std::cos(theta), r * std::sin(theta)};
}

Matrix rsrp_from_gain(const RadioConfig& config, const Matrix& gain) {
  Matrix rsrp(gain.rows(), gain.cols());
  for (std::size_t n = 0; n < gain.rows(); ++n)
    for (std::size_t s = 0; s < gain.cols(); ++s)
      rsrp(n, s) = config.tx_power_dbm + linear_to_db(gain(n, s));
  return rsrp;
}

}  // namespace

NetworkInstance generate_topology(const RadioConfig& config, int n_ues, int n_sbs,
                                  std::uint64_t seed) {
  if (n_ues < 1 || n_sbs < 1)
    throw Error(ErrorCode::kEmptyNetwork, "need at least one UE and one SBS");
  config.validate(n_sbs);

  Rng rng = Rng::derive(seed, Stream::kTopology);
  NetworkInstance net;
  net.seed = seed;
  for (int s = 0; s < n_sbs; ++s) net.sbs_positions.push_back(uniform_in_disc(rng, config.network_radius_m));

  const Point mbs{0.0, 0.0};
  for (int n = 0; n < n_ues; ++n) {
    Point p;
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      p = uniform_in_disc(rng, config.network_radius_m);
      ok = distance(p, mbs) >= config.ue_min_dist_m;
      for (const Point& b : net.sbs_positions)
        ok = ok && distance(p, b) >= config.ue_min_dist_m;
    }
    if (!ok) throw Error(ErrorCode::kInvalidConfig, "cannot place UE outside exclusion zones");
    net.ue_positions.push_back(p);
  }

  // Shadowing is drawn once per link and held for the whole experiment.
  net.channel_gain = Matrix(n_ues, n_sbs);
  for (int n = 0; n < n_ues; ++n) {
    for (int s = 0; s < n_sbs; ++s) {
      double d = distance(net.ue_positions[n], net.sbs_positions[s]);
      double loss = path_loss_db(config, d) + rng.normal(0.0, config.shadowing_std_db);
      net.channel_gain(n, s) = db_to_linear(-std::max(loss, 0.0));
    }
  }
  net.rsrp_dbm = rsrp_from_gain(config, net.channel_gain);
  return net;
}

NetworkInstance make_instance(const RadioConfig& config, std::vector<Point> sbs,
                              std::vector<Point> ues, Matrix channel_gain,
                              std::uint64_t seed) {
  if (sbs.empty() || ues.empty()) throw Error(ErrorCode::kEmptyNetwork, "empty instance");
  if (channel_gain.rows() != ues.size() || channel_gain.cols() != sbs.size())
    throw Error(ErrorCode::kInvalidArgument, "channel gain must be N x S");
  for (double g : channel_gain.data())
    if (!(g > 0.0 && g <= 1.0) || !std::isfinite(g))
      throw Error(ErrorCode::kInvalidArgument, "channel gains must lie in (0, 1]");
  NetworkInstance net;
  net.sbs_positions = std::move(sbs);
  net.ue_positions = std::move(ues);
  net.channel_gain = std::move(channel_gain);
  net.rsrp_dbm = rsrp_from_gain(config, net.channel_gain);
  net.seed = seed;
  return net;
}

nlohmann::json to_json(const NetworkInstance& net) {
  nlohmann::json doc;
  doc["seed"] = net.seed;
  auto points = [](const std::vector<Point>& ps) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Point& p : ps) arr.push_back({p.x, p.y});
    return arr;
  };
  doc["sbs_positions"] = points(net.sbs_positions);
  doc["ue_positions"] = points(net.ue_positions);
  nlohmann::json gains = nlohmann::json::array();
  for (std::size_t n = 0; n < net.channel_gain.rows(); ++n) {
    auto row = net.channel_gain.row(n);
    gains.push_back(std::vector<double>(row.begin(), row.end()));
  }
  doc["channel_gain"] = std::move(gains);
  return doc;
}

NetworkInstance network_from_json(const nlohmann::json& doc, const RadioConfig& config) {
  try {
    auto points = [](const nlohmann::json& arr) {
      std::vector<Point> ps;
      for (const auto& p : arr) ps.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      return ps;
    };
    auto sbs = points(doc.at("sbs_positions"));
    auto ues = points(doc.at("ue_positions"));
    Matrix gain(ues.size(), sbs.size());
    const auto& rows = doc.at("channel_gain");
    if (rows.size() != ues.size())
      throw Error(ErrorCode::kInvalidArgument, "channel_gain row count mismatch");
    for (std::size_t n = 0; n < ues.size(); ++n) {
      if (rows[n].size() != sbs.size())
        throw Error(ErrorCode::kInvalidArgument, "channel_gain column count mismatch");
      for (std::size_t s = 0; s < sbs.size(); ++s) gain(n, s) = rows[n][s].get<double>();
    }
    return make_instance(config, std::move(sbs), std::move(ues), std::move(gain),
                         doc.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad network document: ") + e.what());
  }
}

SinrTable compute_sinr(const NetworkInstance& net, const RadioConfig& config) {
  const std::size_t n_ues = net.channel_gain.rows();
  const std::size_t n_sbs = net.channel_gain.cols();
  const double power_w = dbm_to_watts(config.tx_power_dbm);
  const double noise_w = config.noise_power_w();

  SinrTable table{Matrix(n_ues, n_sbs), Matrix(n_ues, n_sbs)};
  for (std::size_t n = 0; n < n_ues; ++n) {
    for (std::size_t s = 0; s < n_sbs; ++s) {
      double signal = power_w * net.channel_gain(n, s);
      double interference = 0.0;
      for (std::size_t o = 0; o < n_sbs; ++o)
        if (o != s) interference += power_w * net.channel_gain(n, o);
      double denom = interference + noise_w;
      table.gamma(n, s) = signal / denom;
      table.interference_dbm(n, s) = watts_to_dbm(denom);
    }
  }
  return table;
}

double rate_single(int ue, int sbs, double n_rbs, const SinrTable& sinr,
                   const RadioConfig& config) {
  if (n_rbs < 0) throw Error(ErrorCode::kInvalidArgument, "negative RB count");
  if (n_rbs == 0) return 0.0;
  return n_rbs * config.rb_bandwidth_hz * std::log2(1.0 + sinr.gamma(ue, sbs));
}

double rate_general(int ue, std::span<const int> sbs_set, std::span<const double> beta,
                    const SinrTable& sinr, const RadioConfig& config) {
  if (sbs_set.empty()) throw Error(ErrorCode::kEmptyAssignment, "UE has no assigned SBS");
  if (beta.size() != sbs_set.size())
    throw Error(ErrorCode::kInvalidArgument, "one bandwidth fraction per assigned SBS");
  double rate = 0.0;
  for (std::size_t i = 0; i < sbs_set.size(); ++i) {
    if (!(beta[i] > 0.0 && beta[i] <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "bandwidth fraction must lie in (0, 1]");
    int s = sbs_set[i];
    rate += beta[i] * config.subbands_of(s) * config.rb_bandwidth_hz *
            std::log2(1.0 + sinr.gamma(ue, s));
  }
  return rate;
}

Matrix full_band_rates(const SinrTable& sinr, const RadioConfig& config) {
  Matrix rates(sinr.gamma.rows(), sinr.gamma.cols());
  for (std::size_t n = 0; n < rates.rows(); ++n)
    for (std::size_t s = 0; s < rates.cols(); ++s) {
      int sbs = static_cast<int>(s);
      double one = 1.0;
      rates(n, s) = rate_general(static_cast<int>(n), std::span<const int>(&sbs, 1),
                                 std::span<const double>(&one, 1), sinr, config);
    }
  return rates;
}

double median_sinr(const SinrTable& sinr) {
  std::vector<double> values = sinr.gamma.data();
  if (values.empty()) return 0.0;
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

}  // namespace edgedem::radio
