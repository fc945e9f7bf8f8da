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

// Latent-only gaze regression head.
//
// Each chunk i carries a gate sigmoid(attention_logits[i]) that scales its
// elements. The gated elements of the masked chunks (ascending chunk order)
// form the input x, and
//
//   h = relu(W1 x + b1),   (yaw, pitch) = W2 h + b2      (radians)
//
// The loss over a batch is the mean of ||prediction - label||^2 on radian
// angle pairs.

#ifndef GAZECHUNK_REGRESSOR_HPP
#define GAZECHUNK_REGRESSOR_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gazechunk/core.hpp"
#include "gazechunk/statedit.hpp"

namespace gazechunk {

struct RegressorParams {
  Eigen::VectorXd attention_logits;  // n_chunks
  Eigen::MatrixXd w1;                // hidden x input
  Eigen::VectorXd b1;                // hidden
  Eigen::MatrixXd w2;                // 2 x hidden
  Eigen::VectorXd b2;                // 2

  static RegressorParams zeros(std::size_t n_chunks, std::size_t input_dim, std::size_t hidden);

  std::size_t hidden() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t parameter_count() const;

  /// Visits every scalar in a fixed order: logits, w1, b1, w2, b2.
  template <class Fn>
  void for_each(Fn&& fn);

  bool all_finite() const;
};

bool operator==(const RegressorParams& a, const RegressorParams& b);

/// Throws kStructural unless the shapes agree with `mask`.
void check_shapes(const RegressorParams& params, const SelectionMask& mask);

struct AnglePrediction {
  double yaw_rad = 0.0;
  double pitch_rad = 0.0;
};

AnglePrediction forward(const RegressorParams& params, std::span<const double> code,
                        const SelectionMask& mask);
AnglePrediction forward(const RegressorParams& params, const LatentCode& code,
                        const SelectionMask& mask);

/// Forward pass over a set of rows, one column per sample (2 x n).
Eigen::MatrixXd predict(const RegressorParams& params, const LatentDataset& dataset,
                        std::span<const std::size_t> rows, const SelectionMask& mask);

struct LossAndGradients {
  double loss = 0.0;
  RegressorParams gradients;
};

LossAndGradients loss_and_gradients(const RegressorParams& params, const LatentDataset& dataset,
                                    std::span<const std::size_t> rows, const SelectionMask& mask);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 50;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double momentum = 0.0;
  std::size_t hidden = 128;
};

/// Seeded uniform [-0.05, 0.05] initialization of every parameter.
RegressorParams initialize(std::size_t n_chunks, std::size_t input_dim, std::size_t hidden,
                           std::uint64_t seed);

struct TrainResult {
  RegressorParams params;
  std::vector<double> loss_curve;  // mean batch loss per epoch
};

/// Mini-batch gradient descent with optional heavy-ball momentum. Throws
/// DivergedWithState<RegressorParams> if a batch loss becomes non-finite.
TrainResult train(const LatentDataset& dataset, const SelectionMask& mask,
                  const TrainConfig& config);

/// Mean angular error in degrees between predicted and labelled gaze vectors.
double evaluate(const RegressorParams& params, const LatentDataset& dataset,
                const SelectionMask& mask);

struct SensitivityReport {
  std::vector<double> per_element;  // total_dims, zero outside the mask
  std::vector<double> per_chunk;    // n_chunks, mean over the chunk's elements
  std::vector<std::size_t> rank;    // 1 = most sensitive chunk
  std::vector<std::size_t> order;   // chunk indices, most sensitive first
};

/// Mean over samples of |d yaw / d x_e| + |d pitch / d x_e| for every raw
/// latent element, then averaged within chunks and ranked like rank_chunks.
SensitivityReport gradient_sensitivity(const RegressorParams& params,
                                       const LatentDataset& dataset, const SelectionMask& mask);

template <class Fn>
void RegressorParams::for_each(Fn&& fn) {
  for (Eigen::Index i = 0; i < attention_logits.size(); ++i) fn(attention_logits(i));
  for (Eigen::Index i = 0; i < w1.size(); ++i) fn(w1.data()[i]);
  for (Eigen::Index i = 0; i < b1.size(); ++i) fn(b1(i));
  for (Eigen::Index i = 0; i < w2.size(); ++i) fn(w2.data()[i]);
  for (Eigen::Index i = 0; i < b2.size(); ++i) fn(b2(i));
}

}  // namespace gazechunk

#endif  // GAZECHUNK_REGRESSOR_HPP
