#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doubt/cost.hpp"
#include "doubt/json_format.hpp"
#include "doubt/score_core.hpp"

namespace doubt {

struct SyntheticDataset {
  std::vector<std::array<double, 2>> points;
  std::vector<int> labels;
  int classes = 0;
  std::uint32_t seed = 0;
};

/// Gaussian clusters around fixed centers on a circle of radius 3,
/// reproducible from the seed. spread = 0 collapses each cluster onto its
/// center, giving linearly separable data.
inline SyntheticDataset make_blobs(int classes, int n_per_class, double spread,
                                   std::uint32_t seed) {
  if (classes < 2) throw std::invalid_argument("make_blobs: need at least 2 classes");
  if (n_per_class < 1) throw std::invalid_argument("make_blobs: need at least 1 point per class");
  if (!(spread >= 0.0)) throw std::invalid_argument("make_blobs: spread must be non-negative");

  SyntheticDataset data;
  data.classes = classes;
  data.seed = seed;
  std::mt19937 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  constexpr double kRadius = 3.0;
  for (int k = 0; k < classes; ++k) {
    const double angle = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(classes);
    const double cx = kRadius * std::cos(angle);
    const double cy = kRadius * std::sin(angle);
    for (int i = 0; i < n_per_class; ++i) {
      const double dx = spread * unit(rng);
      const double dy = spread * unit(rng);
      data.points.push_back({cx + dx, cy + dy});
      data.labels.push_back(k);
    }
  }
  return data;
}

/// Two affine layers with a ReLU between: input 2 -> hidden H -> K logits.
struct TinyNet {
  int hidden = 0;
  int classes = 0;
  std::vector<double> w1;  // hidden x 2, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // classes x hidden, row-major
  std::vector<double> b2;  // classes

  static TinyNet init(int hidden, int classes, std::uint32_t seed) {
    if (hidden < 1 || classes < 2) throw std::invalid_argument("TinyNet: bad shape");
    TinyNet net;
    net.hidden = hidden;
    net.classes = classes;
    net.w1.resize(static_cast<std::size_t>(hidden) * 2);
    net.b1.assign(hidden, 0.0);
    net.w2.resize(static_cast<std::size_t>(classes) * hidden);
    net.b2.assign(classes, 0.0);
    std::mt19937 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double scale1 = 1.0;  // sqrt(2 / fan_in) with fan_in = 2
    const double scale2 = std::sqrt(2.0 / static_cast<double>(hidden));
    for (double& w : net.w1) w = scale1 * unit(rng);
    for (double& w : net.w2) w = scale2 * unit(rng);
    return net;
  }

  std::vector<double> forward(const std::array<double, 2>& x) const {
    std::vector<double> act(hidden);
    for (int h = 0; h < hidden; ++h) {
      const double pre = w1[h * 2] * x[0] + w1[h * 2 + 1] * x[1] + b1[h];
      act[h] = pre > 0.0 ? pre : 0.0;
    }
    std::vector<double> logits(classes);
    for (int c = 0; c < classes; ++c) {
      double v = b2[c];
      for (int h = 0; h < hidden; ++h) v += w2[c * hidden + h] * act[h];
      logits[c] = v;
    }
    return logits;
  }
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double accuracy = 0.0;
  double mean_cross_entropy = 0.0;
  double mean_doubt_cost = 0.0;
  std::size_t degenerate_count = 0;  // samples with tied max logits this epoch
};

struct TrainConfig {
  double lambda = 0.0;
  std::size_t epochs = 500;
  double learning_rate = 0.1;
  std::uint32_t seed = 42;
  int hidden = 16;
};

struct TrainResult {
  TinyNet net;
  std::vector<EpochMetrics> metrics;
};

/// Full-batch gradient descent on the mean composite loss
/// (cross entropy + lambda * raw doubt cost); single-threaded and
/// deterministic. Metrics are measured on the weights entering each epoch.
inline TrainResult train(const SyntheticDataset& data, const TrainConfig& cfg) {
  if (data.points.empty()) throw std::invalid_argument("train: empty dataset");
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("train: lambda must be non-negative");

  TrainResult result;
  TinyNet& net = result.net;
  net = TinyNet::init(cfg.hidden, data.classes, cfg.seed);
  const std::size_t samples = data.points.size();
  const int hidden = net.hidden;
  const int classes = net.classes;

  std::vector<double> gw1(net.w1.size());
  std::vector<double> gb1(net.b1.size());
  std::vector<double> gw2(net.w2.size());
  std::vector<double> gb2(net.b2.size());
  std::vector<double> act(hidden);
  std::vector<double> pre(hidden);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(gw1.begin(), gw1.end(), 0.0);
    std::fill(gb1.begin(), gb1.end(), 0.0);
    std::fill(gw2.begin(), gw2.end(), 0.0);
    std::fill(gb2.begin(), gb2.end(), 0.0);

    EpochMetrics m;
    m.epoch = epoch;

    for (std::size_t s = 0; s < samples; ++s) {
      const auto& x = data.points[s];
      const int label = data.labels[s];

      for (int h = 0; h < hidden; ++h) {
        pre[h] = net.w1[h * 2] * x[0] + net.w1[h * 2 + 1] * x[1] + net.b1[h];
        act[h] = pre[h] > 0.0 ? pre[h] : 0.0;
      }
      std::vector<double> logits(classes);
      for (int c = 0; c < classes; ++c) {
        double v = net.b2[c];
        for (int h = 0; h < hidden; ++h) v += net.w2[c * hidden + h] * act[h];
        logits[c] = v;
      }

      for (double v : logits) {
        if (!std::isfinite(v)) {
          throw std::runtime_error("train: non-finite logits at epoch " + std::to_string(epoch) +
                                   ", sample " + std::to_string(s));
        }
      }
      LogitVector y(logits);
      const CompositeLossResult sample = composite_loss(y, static_cast<std::size_t>(label),
                                                        cfg.lambda);
      if (!std::isfinite(sample.loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", sample " + std::to_string(s));
      }

      // metrics, independent of lambda
      const std::size_t j = argmax_index(y);
      if (static_cast<int>(j) == label) m.accuracy += 1.0;
      const double lse_m = y[j];
      double expsum = 0.0;
      for (int c = 0; c < classes; ++c) expsum += std::exp(logits[c] - lse_m);
      m.mean_cross_entropy += std::log(expsum) + (lse_m - logits[label]);
      m.mean_doubt_cost += raw_doubt_cost(y, j);
      if (raw_doubt_cost_gradient(y, j).degenerate) ++m.degenerate_count;

      // backprop of the mean loss
      const std::vector<double>& gl = sample.gradient.entries;
      for (int c = 0; c < classes; ++c) {
        gb2[c] += gl[c];
        for (int h = 0; h < hidden; ++h) gw2[c * hidden + h] += gl[c] * act[h];
      }
      for (int h = 0; h < hidden; ++h) {
        if (pre[h] <= 0.0) continue;
        double gh = 0.0;
        for (int c = 0; c < classes; ++c) gh += gl[c] * net.w2[c * hidden + h];
        gb1[h] += gh;
        gw1[h * 2] += gh * x[0];
        gw1[h * 2 + 1] += gh * x[1];
      }
    }

    const double inv = 1.0 / static_cast<double>(samples);
    const double step = cfg.learning_rate * inv;
    for (std::size_t i = 0; i < net.w1.size(); ++i) net.w1[i] -= step * gw1[i];
    for (std::size_t i = 0; i < net.b1.size(); ++i) net.b1[i] -= step * gb1[i];
    for (std::size_t i = 0; i < net.w2.size(); ++i) net.w2[i] -= step * gw2[i];
    for (std::size_t i = 0; i < net.b2.size(); ++i) net.b2[i] -= step * gb2[i];

    m.accuracy *= inv;
    m.mean_cross_entropy *= inv;
    m.mean_doubt_cost *= inv;
    result.metrics.push_back(m);
  }
  return result;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<EpochMetrics>& metrics) {
  os << "epoch,acc,ce,doubt_cost,degenerate_count\n";
  for (const EpochMetrics& m : metrics) {
    os << m.epoch << ',' << format_double(m.accuracy) << ',' << format_double(m.mean_cross_entropy)
       << ',' << format_double(m.mean_doubt_cost) << ',' << m.degenerate_count << '\n';
  }
}

}  // namespace doubt
