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

// Toy gaze-preserving domain shift.
//
// Images are plain vectors of dimension m. An affine encoder E maps them to a
// d-dimensional latent, a fixed affine generator G maps latents back to image
// space, and an affine extractor F reads (yaw, pitch) in radians off an image.
// G is built once from source images (mean plus leading principal directions)
// and never changes afterwards.
//
// Training runs in two phases. Phase one fits F to source labels. Phase two
// fits E to
//
//   l2 * ||I - G(E(I))||^2 + lpips * L_lpips + sim * L_sim
//      + gd * ||v(F(G(E(I)))) - v(label)||^2
//
// with G and F frozen, where v() turns a (yaw, pitch) pair into a unit gaze
// vector. The perceptual and identity terms are pluggable and default to zero.

#ifndef GAZECHUNK_SHIFTSIM_HPP
#define GAZECHUNK_SHIFTSIM_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "gazechunk/core.hpp"

namespace gazechunk {

struct AffineMap {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return weight * x + bias; }
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& x) const {
    return (weight * x).colwise() + bias;
  }
  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

bool operator==(const AffineMap& a, const AffineMap& b);

class ToyPipelineParams {
 public:
  /// Dimensions must chain: encoder m->d, generator d->m, extractor m->2.
  ToyPipelineParams(AffineMap encoder, AffineMap generator, AffineMap extractor);

  AffineMap encoder;
  AffineMap extractor;
  /// Set by train_extractor; train_encoder refuses to run without it.
  bool extractor_trained = false;

  const AffineMap& generator() const { return generator_; }
  std::size_t image_dim() const { return generator_.out_dim(); }
  std::size_t latent_dim() const { return generator_.in_dim(); }

  /// G(E(image)).
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& image) const;
  Eigen::MatrixXd shift(const Eigen::MatrixXd& images) const;

 private:
  AffineMap generator_;
};

/// Images as columns, with one label per column.
struct DomainData {
  Eigen::MatrixXd images;
  std::vector<GazeLabel> labels;

  std::size_t size() const { return labels.size(); }
};

struct DomainPair {
  DomainData source;
  DomainData target;
};

/// Treats each latent code of a dataset as an image vector.
DomainData to_domain_data(const LatentDataset& dataset);

/// Builds G from the source images (mean plus the latent_dim leading
/// orthonormal principal directions) and seeds E and F uniformly in
/// [-0.05, 0.05].
ToyPipelineParams build_pipeline(const DomainData& source, std::size_t latent_dim,
                                 std::uint64_t seed);

struct LossWeights {
  double l2 = 1.0;
  double lpips = 0.0;
  double sim = 0.0;
  double gd = 1.0;
};

void validate(const LossWeights& weights);

/// A differentiable scalar of (image, reconstruction). When grad_recon is not
/// null it must receive d loss / d reconstruction.
using ReconstructionLoss = std::function<double(const Eigen::VectorXd& image,
                                                const Eigen::VectorXd& reconstruction,
                                                Eigen::VectorXd* grad_recon)>;

ReconstructionLoss zero_loss();

struct PluggableLosses {
  ReconstructionLoss lpips = zero_loss();
  ReconstructionLoss sim = zero_loss();
};

/// ||v(F(G(E(image)))) - v(label)||^2.
double gaze_distortion_loss(const ToyPipelineParams& params, const Eigen::VectorXd& image,
                            const GazeLabel& label);

/// ||image - G(E(image))||^2.
double reconstruction_loss(const ToyPipelineParams& params, const Eigen::VectorXd& image);

struct LossTerms {
  double l2 = 0.0;
  double lpips = 0.0;
  double sim = 0.0;
  double gd = 0.0;
  double total = 0.0;
};

LossTerms loss_terms(const ToyPipelineParams& params, const Eigen::VectorXd& image,
                     const GazeLabel& label, const LossWeights& weights,
                     const PluggableLosses& plug = {});

double total_loss(const ToyPipelineParams& params, const Eigen::VectorXd& image,
                  const GazeLabel& label, const LossWeights& weights,
                  const PluggableLosses& plug = {});

/// Gradients of total_loss with respect to the learnable maps.
struct PipelineGradients {
  AffineMap encoder;
  AffineMap extractor;
};

PipelineGradients total_loss_gradients(const ToyPipelineParams& params,
                                       const Eigen::VectorXd& image, const GazeLabel& label,
                                       const LossWeights& weights,
                                       const PluggableLosses& plug = {});

struct ShiftTrainConfig {
  double learning_rate = 0.01;
  int epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double momentum = 0.9;
  /// Phase two only: also update F instead of keeping it frozen.
  bool joint = false;
};

struct ShiftTrainResult {
  ToyPipelineParams params;
  std::vector<double> loss_curve;  // mean batch loss per epoch
};

/// Phase one: fits F to source labels (MSE on radian angles). E and G are
/// untouched. Sets extractor_trained.
ShiftTrainResult train_extractor(ToyPipelineParams params, const DomainData& source,
                                 const ShiftTrainConfig& config);

/// Phase two: fits E (and F when config.joint) to the mean total loss over
/// the source data. Throws kConfiguration if F was never trained.
ShiftTrainResult train_encoder(ToyPipelineParams params, const DomainData& source,
                               const LossWeights& weights, const ShiftTrainConfig& config,
                               const PluggableLosses& plug = {});

/// Mean gaze distortion loss over a data set.
double mean_gaze_distortion(const ToyPipelineParams& params, const DomainData& data);
/// Mean reconstruction loss over a data set.
double mean_reconstruction(const ToyPipelineParams& params, const DomainData& data);

using FeatureMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

FeatureMap identity_features();

/// ||mean(features(shifted_targets)) - mean(features(source))||.
double domain_gap(const FeatureMap& features, const Eigen::MatrixXd& shifted_targets,
                  const Eigen::MatrixXd& source);

/// Worst |analytic - numeric| / max(1, |analytic|, |numeric|) over every
/// encoder and extractor parameter, using central differences with step 1e-5.
double grad_check(const ToyPipelineParams& params, const Eigen::VectorXd& image,
                  const GazeLabel& label, const LossWeights& weights,
                  const PluggableLosses& plug = {});

/// grad_check over n_configs random pipelines, points and weights drawn from
/// seed. Returns the worst relative error seen.
double random_grad_check(std::uint64_t seed, std::size_t n_configs);

struct ShiftExperimentConfig {
  std::size_t latent_dim = 4;
  std::uint64_t seed = 0;  // pipeline initialisation
  LossWeights weights;
  ShiftTrainConfig extractor{0.001, 60, 32, 0, 0.9, false};
  ShiftTrainConfig encoder{0.001, 30, 32, 0, 0.9, false};
};

struct ShiftExperimentResult {
  ToyPipelineParams params;
  std::vector<double> extractor_curve;
  std::vector<double> encoder_curve;
  double heldout_gaze_distortion = 0.0;  // on the target images
  double heldout_reconstruction = 0.0;
  double gap_raw = 0.0;      // domain_gap(targets, source)
  double gap_shifted = 0.0;  // domain_gap(G(E(targets)), source)
};

/// Builds the pipeline on the source, runs both training phases on the
/// source and measures on the target.
ShiftExperimentResult run_shift_experiment(const DomainPair& data,
                                           const ShiftExperimentConfig& config);

}  // namespace gazechunk

#endif  // GAZECHUNK_SHIFTSIM_HPP
