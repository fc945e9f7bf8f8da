// Copyright (c) 2026, The gazechunk Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gazechunk/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace gazechunk {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

RegressorParams RegressorParams::zeros(std::size_t n_chunks, std::size_t input_dim,
                                       std::size_t hidden) {
  RegressorParams p;
  p.attention_logits = VectorXd::Zero(static_cast<Index>(n_chunks));
  p.w1 = MatrixXd::Zero(static_cast<Index>(hidden), static_cast<Index>(input_dim));
  p.b1 = VectorXd::Zero(static_cast<Index>(hidden));
  p.w2 = MatrixXd::Zero(2, static_cast<Index>(hidden));
  p.b2 = VectorXd::Zero(2);
  return p;
}

std::size_t RegressorParams::parameter_count() const {
  return static_cast<std::size_t>(attention_logits.size() + w1.size() + b1.size() + w2.size() +
                                  b2.size());
}

bool RegressorParams::all_finite() const {
  return attention_logits.allFinite() && w1.allFinite() && b1.allFinite() && w2.allFinite() &&
         b2.allFinite();
}

namespace {

template <class A, class B>
bool same(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Raw (ungated) masked inputs, one column per row.
MatrixXd masked_inputs(const LatentDataset& dataset, std::span<const std::size_t> rows,
                       const SelectionMask& mask) {
  const std::size_t cs = mask.layout().chunk_size();
  MatrixXd raw(static_cast<Index>(mask.size() * cs), static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto code = dataset.code(rows[r]);
    Index e = 0;
    for (std::size_t c : mask.chunk_indices())
      for (std::size_t j = 0; j < cs; ++j) raw(e++, static_cast<Index>(r)) = code[c * cs + j];
  }
  return raw;
}

MatrixXd masked_inputs(std::span<const double> code, const SelectionMask& mask) {
  const std::size_t cs = mask.layout().chunk_size();
  MatrixXd raw(static_cast<Index>(mask.size() * cs), 1);
  Index e = 0;
  for (std::size_t c : mask.chunk_indices())
    for (std::size_t j = 0; j < cs; ++j) raw(e++, 0) = code[c * cs + j];
  return raw;
}

// Gate of every input element.
VectorXd expanded_gates(const RegressorParams& params, const SelectionMask& mask) {
  const std::size_t cs = mask.layout().chunk_size();
  VectorXd g(static_cast<Index>(mask.size() * cs));
  Index e = 0;
  for (std::size_t c : mask.chunk_indices()) {
    const double gate = sigmoid(params.attention_logits(static_cast<Index>(c)));
    for (std::size_t j = 0; j < cs; ++j) g(e++) = gate;
  }
  return g;
}

MatrixXd label_targets(const LatentDataset& dataset, std::span<const std::size_t> rows) {
  MatrixXd y(2, static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const GazeLabel& l = dataset.label(rows[r]);
    y(0, static_cast<Index>(r)) = deg_to_rad(l.yaw_deg);
    y(1, static_cast<Index>(r)) = deg_to_rad(l.pitch_deg);
  }
  return y;
}

struct Activations {
  MatrixXd x;   // gated input
  MatrixXd z1;  // pre-activation
  MatrixXd h;
  MatrixXd y;
};

Activations run_forward(const RegressorParams& p, const MatrixXd& raw, const VectorXd& gates) {
  Activations a;
  a.x = gates.asDiagonal() * raw;
  a.z1 = (p.w1 * a.x).colwise() + p.b1;
  a.h = a.z1.cwiseMax(0.0);
  a.y = (p.w2 * a.h).colwise() + p.b2;
  return a;
}

// Loss and gradients for a precomputed raw input block.
LossAndGradients backprop(const RegressorParams& p, const SelectionMask& mask, const MatrixXd& raw,
                          const MatrixXd& targets) {
  const VectorXd gates = expanded_gates(p, mask);
  const Activations a = run_forward(p, raw, gates);
  const double n = static_cast<double>(raw.cols());

  const MatrixXd diff = a.y - targets;
  LossAndGradients out;
  out.loss = diff.squaredNorm() / n;

  const MatrixXd dy = (2.0 / n) * diff;
  RegressorParams& g = out.gradients;
  g.w2 = dy * a.h.transpose();
  g.b2 = dy.rowwise().sum();
  const MatrixXd dz1 = (p.w2.transpose() * dy).cwiseProduct((a.z1.array() > 0.0).cast<double>().matrix());
  g.w1 = dz1 * a.x.transpose();
  g.b1 = dz1.rowwise().sum();

  // d loss / d gate_e = sum_b (W1^T dz1)_eb raw_eb; chain through the sigmoid.
  const VectorXd dgate = (p.w1.transpose() * dz1).cwiseProduct(raw).rowwise().sum();
  g.attention_logits = VectorXd::Zero(p.attention_logits.size());
  const std::size_t cs = mask.layout().chunk_size();
  Index e = 0;
  for (std::size_t c : mask.chunk_indices()) {
    const double s = sigmoid(p.attention_logits(static_cast<Index>(c)));
    double acc = 0.0;
    for (std::size_t j = 0; j < cs; ++j) acc += dgate(e++);
    g.attention_logits(static_cast<Index>(c)) = acc * s * (1.0 - s);
  }
  return out;
}

}  // namespace

bool operator==(const RegressorParams& a, const RegressorParams& b) {
  return same(a.attention_logits, b.attention_logits) && same(a.w1, b.w1) && same(a.b1, b.b1) &&
         same(a.w2, b.w2) && same(a.b2, b.b2);
}

void check_shapes(const RegressorParams& params, const SelectionMask& mask) {
  const auto& layout = mask.layout();
  const Index in = static_cast<Index>(mask.size() * layout.chunk_size());
  const Index h = params.w1.rows();
  if (params.attention_logits.size() != static_cast<Index>(layout.n_chunks()) ||
      params.w1.cols() != in || params.b1.size() != h || params.w2.rows() != 2 ||
      params.w2.cols() != h || params.b2.size() != 2)
    fail(ErrorKind::kStructural,
         "regressor shapes do not match a mask of " + std::to_string(mask.size()) +
             " chunks under layout " + to_string(layout));
}

AnglePrediction forward(const RegressorParams& params, std::span<const double> code,
                        const SelectionMask& mask) {
  check_shapes(params, mask);
  if (code.size() != mask.layout().total_dims())
    fail(ErrorKind::kStructural, "code length does not match the mask layout");
  const Activations a = run_forward(params, masked_inputs(code, mask), expanded_gates(params, mask));
  return {a.y(0, 0), a.y(1, 0)};
}

AnglePrediction forward(const RegressorParams& params, const LatentCode& code,
                        const SelectionMask& mask) {
  if (!(code.layout() == mask.layout()))
    fail(ErrorKind::kStructural, "code layout differs from the mask layout");
  return forward(params, code.values(), mask);
}

MatrixXd predict(const RegressorParams& params, const LatentDataset& dataset,
                 std::span<const std::size_t> rows, const SelectionMask& mask) {
  check_shapes(params, mask);
  if (!(dataset.layout() == mask.layout()))
    fail(ErrorKind::kStructural, "dataset layout differs from the mask layout");
  const VectorXd gates = expanded_gates(params, mask);
  MatrixXd out(2, static_cast<Index>(rows.size()));
  constexpr std::size_t kBlock = 256;
  for (std::size_t start = 0; start < rows.size(); start += kBlock) {
    const std::size_t len = std::min(kBlock, rows.size() - start);
    const Activations a = run_forward(params, masked_inputs(dataset, rows.subspan(start, len), mask), gates);
    out.middleCols(static_cast<Index>(start), static_cast<Index>(len)) = a.y;
  }
  return out;
}

LossAndGradients loss_and_gradients(const RegressorParams& params, const LatentDataset& dataset,
                                    std::span<const std::size_t> rows, const SelectionMask& mask) {
  check_shapes(params, mask);
  if (rows.empty()) fail(ErrorKind::kInsufficientData, "loss over an empty batch");
  if (!(dataset.layout() == mask.layout()))
    fail(ErrorKind::kStructural, "dataset layout differs from the mask layout");
  return backprop(params, mask, masked_inputs(dataset, rows, mask), label_targets(dataset, rows));
}

RegressorParams initialize(std::size_t n_chunks, std::size_t input_dim, std::size_t hidden,
                           std::uint64_t seed) {
  if (hidden == 0) fail(ErrorKind::kConfiguration, "hidden width must be positive");
  RegressorParams p = RegressorParams::zeros(n_chunks, input_dim, hidden);
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  p.for_each([&](double& v) { v = dist(engine); });
  return p;
}

TrainResult train(const LatentDataset& dataset, const SelectionMask& mask,
                  const TrainConfig& config) {
  if (dataset.empty()) fail(ErrorKind::kInsufficientData, "training on an empty dataset");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate))
    fail(ErrorKind::kConfiguration, "learning_rate must be finite and non-negative");
  if (config.epochs < 0) fail(ErrorKind::kConfiguration, "epochs must be non-negative");
  if (config.batch_size == 0) fail(ErrorKind::kConfiguration, "batch_size must be positive");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0))
    fail(ErrorKind::kConfiguration, "momentum must lie in [0, 1)");
  if (!(dataset.layout() == mask.layout()))
    fail(ErrorKind::kStructural, "dataset layout differs from the mask layout");

  const std::size_t n = dataset.size();
  const std::size_t input_dim = mask.size() * mask.layout().chunk_size();
  TrainResult result;
  result.params = initialize(mask.layout().n_chunks(), input_dim, config.hidden, config.seed);
  RegressorParams& p = result.params;

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const MatrixXd raw = masked_inputs(dataset, all, mask);
  const MatrixXd targets = label_targets(dataset, all);

  RegressorParams velocity = RegressorParams::zeros(mask.layout().n_chunks(), input_dim, config.hidden);
  std::mt19937_64 shuffler(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  double last_finite = 0.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffler);
    CompensatedSum epoch_loss;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n - start);
      std::vector<Index> cols(order.begin() + static_cast<std::ptrdiff_t>(start),
                              order.begin() + static_cast<std::ptrdiff_t>(start + len));
      const MatrixXd raw_b = raw(Eigen::all, cols);
      const MatrixXd y_b = targets(Eigen::all, cols);
      LossAndGradients lg = backprop(p, mask, raw_b, y_b);
      if (!std::isfinite(lg.loss) || !lg.gradients.all_finite())
        throw DivergedWithState<RegressorParams>(epoch, last_finite, p);
      last_finite = lg.loss;
      epoch_loss.add(lg.loss);
      ++batches;

      velocity.attention_logits = config.momentum * velocity.attention_logits + lg.gradients.attention_logits;
      velocity.w1 = config.momentum * velocity.w1 + lg.gradients.w1;
      velocity.b1 = config.momentum * velocity.b1 + lg.gradients.b1;
      velocity.w2 = config.momentum * velocity.w2 + lg.gradients.w2;
      velocity.b2 = config.momentum * velocity.b2 + lg.gradients.b2;
      p.attention_logits -= config.learning_rate * velocity.attention_logits;
      p.w1 -= config.learning_rate * velocity.w1;
      p.b1 -= config.learning_rate * velocity.b1;
      p.w2 -= config.learning_rate * velocity.w2;
      p.b2 -= config.learning_rate * velocity.b2;
    }
    result.loss_curve.push_back(epoch_loss.value() / static_cast<double>(batches));
  }
  if (!p.all_finite()) throw DivergedWithState<RegressorParams>(config.epochs, last_finite, p);
  return result;
}

double evaluate(const RegressorParams& params, const LatentDataset& dataset,
                const SelectionMask& mask) {
  if (dataset.empty()) fail(ErrorKind::kInsufficientData, "evaluating on an empty dataset");
  std::vector<std::size_t> rows(dataset.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const MatrixXd pred = predict(params, dataset, rows, mask);
  CompensatedSum total;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vec3 p = gaze_vector_from_radians(pred(0, static_cast<Index>(i)), pred(1, static_cast<Index>(i)));
    total.add(angular_error(p, gaze_to_vector(dataset.label(i))));
  }
  return total.value() / static_cast<double>(rows.size());
}

SensitivityReport gradient_sensitivity(const RegressorParams& params,
                                       const LatentDataset& dataset, const SelectionMask& mask) {
  check_shapes(params, mask);
  if (dataset.empty()) fail(ErrorKind::kInsufficientData, "sensitivity over an empty dataset");
  if (!(dataset.layout() == mask.layout()))
    fail(ErrorKind::kStructural, "dataset layout differs from the mask layout");

  const LatentLayout& layout = mask.layout();
  const VectorXd gates = expanded_gates(params, mask);
  VectorXd acc = VectorXd::Zero(gates.size());

  std::vector<std::size_t> rows(dataset.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  constexpr std::size_t kBlock = 256;
  for (std::size_t start = 0; start < rows.size(); start += kBlock) {
    const std::size_t len = std::min(kBlock, rows.size() - start);
    const std::span<const std::size_t> block(rows.data() + start, len);
    const Activations a = run_forward(params, masked_inputs(dataset, block, mask), gates);
    const MatrixXd active = (a.z1.array() > 0.0).cast<double>().matrix();
    // d output_o / d x_raw = gate .* W1^T (W2[o]^T .* relu'(z1)), per column.
    for (Index o = 0; o < 2; ++o) {
      const MatrixXd back = params.w1.transpose() * (params.w2.row(o).transpose().asDiagonal() * active);
      acc += back.cwiseAbs().rowwise().sum();
    }
  }
  acc = acc.cwiseProduct(gates.cwiseAbs()) / static_cast<double>(rows.size());

  SensitivityReport report;
  report.per_element.assign(layout.total_dims(), 0.0);
  report.per_chunk.assign(layout.n_chunks(), 0.0);
  const std::size_t cs = layout.chunk_size();
  Index e = 0;
  for (std::size_t c : mask.chunk_indices()) {
    double s = 0.0;
    for (std::size_t j = 0; j < cs; ++j, ++e) {
      report.per_element[c * cs + j] = acc(e);
      s += acc(e);
    }
    report.per_chunk[c] = s / static_cast<double>(cs);
  }
  report.rank = rank_chunks(report.per_chunk);
  report.order.resize(report.rank.size());
  for (std::size_t c = 0; c < report.rank.size(); ++c) report.order[report.rank[c] - 1] = c;
  return report;
}

}  // namespace gazechunk
