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

#include "gazechunk/shiftsim.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gazechunk/error.hpp"

namespace gazechunk {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

bool operator==(const AffineMap& a, const AffineMap& b) {
  return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
         a.bias.size() == b.bias.size() && (a.weight.array() == b.weight.array()).all() &&
         (a.bias.array() == b.bias.array()).all();
}

ToyPipelineParams::ToyPipelineParams(AffineMap enc, AffineMap gen, AffineMap ext)
    : encoder(std::move(enc)), extractor(std::move(ext)), generator_(std::move(gen)) {
  auto consistent = [](const AffineMap& m) { return m.bias.size() == m.weight.rows(); };
  if (!consistent(encoder) || !consistent(generator_) || !consistent(extractor))
    fail(ErrorKind::kStructural, "affine map bias length differs from its output dimension");
  if (encoder.in_dim() != generator_.out_dim() || generator_.in_dim() != encoder.out_dim() ||
      extractor.in_dim() != generator_.out_dim() || extractor.out_dim() != 2)
    fail(ErrorKind::kStructural, "pipeline maps do not chain m -> d -> m -> 2");
}

VectorXd ToyPipelineParams::reconstruct(const VectorXd& image) const {
  if (static_cast<std::size_t>(image.size()) != image_dim())
    fail(ErrorKind::kStructural, "image dimension differs from the pipeline's");
  return generator_.apply(encoder.apply(image));
}

MatrixXd ToyPipelineParams::shift(const MatrixXd& images) const {
  if (static_cast<std::size_t>(images.rows()) != image_dim())
    fail(ErrorKind::kStructural, "image dimension differs from the pipeline's");
  return generator_.apply_columns(encoder.apply_columns(images));
}

DomainData to_domain_data(const LatentDataset& dataset) {
  DomainData out;
  const Index m = static_cast<Index>(dataset.layout().total_dims());
  out.images.resize(m, static_cast<Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto code = dataset.code(i);
    out.images.col(static_cast<Index>(i)) = Eigen::Map<const VectorXd>(code.data(), m);
  }
  out.labels.assign(dataset.labels().begin(), dataset.labels().end());
  return out;
}

namespace {

void check_data(const DomainData& data, std::size_t image_dim) {
  if (data.size() == 0) fail(ErrorKind::kInsufficientData, "empty domain data");
  if (static_cast<std::size_t>(data.images.cols()) != data.size())
    fail(ErrorKind::kStructural, "image count differs from label count");
  if (static_cast<std::size_t>(data.images.rows()) != image_dim)
    fail(ErrorKind::kStructural, "image dimension differs from the pipeline's");
}

AffineMap seeded_map(std::size_t out, std::size_t in, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  AffineMap map{MatrixXd(static_cast<Index>(out), static_cast<Index>(in)),
                VectorXd(static_cast<Index>(out))};
  for (Index i = 0; i < map.weight.size(); ++i) map.weight.data()[i] = dist(engine);
  for (Index i = 0; i < map.bias.size(); ++i) map.bias(i) = dist(engine);
  return map;
}

MatrixXd radian_targets(const std::vector<GazeLabel>& labels) {
  MatrixXd y(2, static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y(0, static_cast<Index>(i)) = deg_to_rad(labels[i].yaw_deg);
    y(1, static_cast<Index>(i)) = deg_to_rad(labels[i].pitch_deg);
  }
  return y;
}

Eigen::Vector3d as_eigen(const Vec3& v) { return {v[0], v[1], v[2]}; }

// Value of ||v(a) - g||^2 and its gradient with respect to the angles a.
double gaze_term(double yaw, double pitch, const Eigen::Vector3d& truth, Eigen::Vector2d* grad) {
  const Eigen::Vector3d v = as_eigen(gaze_vector_from_radians(yaw, pitch));
  const Eigen::Vector3d d = v - truth;
  if (grad != nullptr) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const Eigen::Vector3d dv_dyaw(cp * cy, 0.0, -cp * sy);
    const Eigen::Vector3d dv_dpitch(-sp * sy, cp, -sp * cy);
    (*grad)(0) = 2.0 * d.dot(dv_dyaw);
    (*grad)(1) = 2.0 * d.dot(dv_dpitch);
  }
  return d.squaredNorm();
}

struct BatchResult {
  double loss = 0.0;
  PipelineGradients grads;
};

// Mean total loss and gradients over the given columns.
BatchResult encoder_batch(const ToyPipelineParams& p, const MatrixXd& x,
                          const std::vector<Eigen::Vector3d>& truth, const LossWeights& w,
                          const PluggableLosses& plug) {
  const double n = static_cast<double>(x.cols());
  const MatrixXd z = p.encoder.apply_columns(x);
  const MatrixXd r = p.generator().apply_columns(z);
  const MatrixXd a = p.extractor.apply_columns(r);

  MatrixXd d_r = (2.0 * w.l2) * (r - x);
  MatrixXd d_a(2, x.cols());
  CompensatedSum total;
  for (Index b = 0; b < x.cols(); ++b) {
    const VectorXd img = x.col(b);
    const VectorXd rec = r.col(b);
    Eigen::Vector2d ga;
    const double gd = gaze_term(a(0, b), a(1, b), truth[static_cast<std::size_t>(b)], &ga);
    d_a.col(b) = w.gd * ga;
    double value = w.l2 * (img - rec).squaredNorm() + w.gd * gd;
    if (w.lpips != 0.0) {
      VectorXd g;
      value += w.lpips * plug.lpips(img, rec, &g);
      d_r.col(b) += w.lpips * g;
    }
    if (w.sim != 0.0) {
      VectorXd g;
      value += w.sim * plug.sim(img, rec, &g);
      d_r.col(b) += w.sim * g;
    }
    total.add(value);
  }
  d_r += p.extractor.weight.transpose() * d_a;
  const MatrixXd d_z = p.generator().weight.transpose() * d_r;

  BatchResult out;
  out.loss = total.value() / n;
  out.grads.encoder.weight = d_z * x.transpose() / n;
  out.grads.encoder.bias = d_z.rowwise().sum() / n;
  out.grads.extractor.weight = d_a * r.transpose() / n;
  out.grads.extractor.bias = d_a.rowwise().sum() / n;
  return out;
}

bool finite(const AffineMap& m) { return m.weight.allFinite() && m.bias.allFinite(); }

void momentum_step(AffineMap& param, AffineMap& velocity, const AffineMap& grad,
                   const ShiftTrainConfig& config) {
  velocity.weight = config.momentum * velocity.weight + grad.weight;
  velocity.bias = config.momentum * velocity.bias + grad.bias;
  param.weight -= config.learning_rate * velocity.weight;
  param.bias -= config.learning_rate * velocity.bias;
}

AffineMap zeros_like(const AffineMap& m) {
  return {MatrixXd::Zero(m.weight.rows(), m.weight.cols()), VectorXd::Zero(m.bias.size())};
}

void check_config(const ShiftTrainConfig& config) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate))
    fail(ErrorKind::kConfiguration, "learning_rate must be finite and non-negative");
  if (config.epochs < 0) fail(ErrorKind::kConfiguration, "epochs must be non-negative");
  if (config.batch_size == 0) fail(ErrorKind::kConfiguration, "batch_size must be positive");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0))
    fail(ErrorKind::kConfiguration, "momentum must lie in [0, 1)");
}

// Calls step(columns) for each shuffled mini-batch of every epoch and collects
// the mean batch loss per epoch.
template <class Step>
std::vector<double> run_epochs(std::size_t n, const ShiftTrainConfig& config, std::uint64_t salt,
                               Step&& step) {
  std::mt19937_64 shuffler(config.seed ^ salt);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<double> curve;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffler);
    CompensatedSum loss;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n - start);
      std::vector<Index> cols(order.begin() + static_cast<std::ptrdiff_t>(start),
                              order.begin() + static_cast<std::ptrdiff_t>(start + len));
      loss.add(step(epoch, cols));
      ++batches;
    }
    curve.push_back(loss.value() / static_cast<double>(batches));
  }
  return curve;
}

}  // namespace

ToyPipelineParams build_pipeline(const DomainData& source, std::size_t latent_dim,
                                 std::uint64_t seed) {
  const std::size_t m = static_cast<std::size_t>(source.images.rows());
  check_data(source, m);
  if (latent_dim == 0 || latent_dim > m)
    fail(ErrorKind::kConfiguration, "latent_dim must lie in [1, image_dim]");
  if (source.size() < 2) fail(ErrorKind::kInsufficientData, "generator needs two source images");

  const VectorXd mean = source.images.rowwise().mean();
  const MatrixXd centered = source.images.colwise() - mean;
  const MatrixXd cov = centered * centered.transpose() / static_cast<double>(source.size() - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorKind::kDomain, "eigen-decomposition failed");

  // Leading directions, largest eigenvalue first, sign fixed so the largest
  // magnitude entry is positive.
  MatrixXd basis(static_cast<Index>(m), static_cast<Index>(latent_dim));
  for (std::size_t j = 0; j < latent_dim; ++j) {
    VectorXd v = eig.eigenvectors().col(static_cast<Index>(m - 1 - j));
    Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v(at) < 0.0) v = -v;
    basis.col(static_cast<Index>(j)) = v;
  }

  std::mt19937_64 engine(seed);
  AffineMap encoder = seeded_map(latent_dim, m, engine);
  AffineMap extractor = seeded_map(2, m, engine);
  return ToyPipelineParams(std::move(encoder), AffineMap{basis, mean}, std::move(extractor));
}

void validate(const LossWeights& w) {
  for (double v : {w.l2, w.lpips, w.sim, w.gd})
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorKind::kConfiguration, "loss weights must be finite and non-negative");
}

ReconstructionLoss zero_loss() {
  return [](const VectorXd&, const VectorXd& recon, VectorXd* grad) {
    if (grad != nullptr) *grad = VectorXd::Zero(recon.size());
    return 0.0;
  };
}

double gaze_distortion_loss(const ToyPipelineParams& params, const VectorXd& image,
                            const GazeLabel& label) {
  const VectorXd angles = params.extractor.apply(params.reconstruct(image));
  return gaze_term(angles(0), angles(1), as_eigen(gaze_to_vector(label)), nullptr);
}

double reconstruction_loss(const ToyPipelineParams& params, const VectorXd& image) {
  return (image - params.reconstruct(image)).squaredNorm();
}

LossTerms loss_terms(const ToyPipelineParams& params, const VectorXd& image,
                     const GazeLabel& label, const LossWeights& weights,
                     const PluggableLosses& plug) {
  validate(weights);
  const VectorXd rec = params.reconstruct(image);
  LossTerms t;
  t.l2 = (image - rec).squaredNorm();
  t.lpips = plug.lpips(image, rec, nullptr);
  t.sim = plug.sim(image, rec, nullptr);
  const VectorXd angles = params.extractor.apply(rec);
  t.gd = gaze_term(angles(0), angles(1), as_eigen(gaze_to_vector(label)), nullptr);
  t.total = weights.l2 * t.l2 + weights.lpips * t.lpips + weights.sim * t.sim + weights.gd * t.gd;
  return t;
}

double total_loss(const ToyPipelineParams& params, const VectorXd& image, const GazeLabel& label,
                  const LossWeights& weights, const PluggableLosses& plug) {
  return loss_terms(params, image, label, weights, plug).total;
}

PipelineGradients total_loss_gradients(const ToyPipelineParams& params, const VectorXd& image,
                                       const GazeLabel& label, const LossWeights& weights,
                                       const PluggableLosses& plug) {
  validate(weights);
  if (static_cast<std::size_t>(image.size()) != params.image_dim())
    fail(ErrorKind::kStructural, "image dimension differs from the pipeline's");
  return encoder_batch(params, image, {as_eigen(gaze_to_vector(label))}, weights, plug).grads;
}

ShiftTrainResult train_extractor(ToyPipelineParams params, const DomainData& source,
                                 const ShiftTrainConfig& config) {
  check_config(config);
  check_data(source, params.image_dim());
  const MatrixXd targets = radian_targets(source.labels);
  AffineMap velocity = zeros_like(params.extractor);
  double last_finite = 0.0;

  auto curve = run_epochs(source.size(), config, 0x51ed270b27a1f1d3ULL,
                          [&](int epoch, const std::vector<Index>& cols) {
    const MatrixXd x = source.images(Eigen::all, cols);
    const MatrixXd y = targets(Eigen::all, cols);
    const double n = static_cast<double>(cols.size());
    const MatrixXd diff = params.extractor.apply_columns(x) - y;
    const double loss = diff.squaredNorm() / n;
    if (!std::isfinite(loss)) throw DivergedWithState<ToyPipelineParams>(epoch, last_finite, params);
    last_finite = loss;
    const MatrixXd d_a = (2.0 / n) * diff;
    momentum_step(params.extractor, velocity, AffineMap{d_a * x.transpose(), d_a.rowwise().sum()},
                  config);
    return loss;
  });
  if (!finite(params.extractor))
    throw DivergedWithState<ToyPipelineParams>(config.epochs, last_finite, params);
  params.extractor_trained = true;
  return {std::move(params), std::move(curve)};
}

ShiftTrainResult train_encoder(ToyPipelineParams params, const DomainData& source,
                               const LossWeights& weights, const ShiftTrainConfig& config,
                               const PluggableLosses& plug) {
  check_config(config);
  validate(weights);
  check_data(source, params.image_dim());
  if (!params.extractor_trained)
    fail(ErrorKind::kConfiguration, "train_encoder needs an extractor trained by train_extractor");

  std::vector<Eigen::Vector3d> truth;
  truth.reserve(source.size());
  for (const auto& l : source.labels) truth.push_back(as_eigen(gaze_to_vector(l)));

  AffineMap v_enc = zeros_like(params.encoder);
  AffineMap v_ext = zeros_like(params.extractor);
  double last_finite = 0.0;

  auto curve = run_epochs(source.size(), config, 0x2545f4914f6cdd1dULL,
                          [&](int epoch, const std::vector<Index>& cols) {
    const MatrixXd x = source.images(Eigen::all, cols);
    std::vector<Eigen::Vector3d> t;
    t.reserve(cols.size());
    for (Index c : cols) t.push_back(truth[static_cast<std::size_t>(c)]);
    BatchResult br = encoder_batch(params, x, t, weights, plug);
    if (!std::isfinite(br.loss) || !finite(br.grads.encoder) || !finite(br.grads.extractor))
      throw DivergedWithState<ToyPipelineParams>(epoch, last_finite, params);
    last_finite = br.loss;
    momentum_step(params.encoder, v_enc, br.grads.encoder, config);
    if (config.joint) momentum_step(params.extractor, v_ext, br.grads.extractor, config);
    return br.loss;
  });
  if (!finite(params.encoder) || !finite(params.extractor))
    throw DivergedWithState<ToyPipelineParams>(config.epochs, last_finite, params);
  return {std::move(params), std::move(curve)};
}

double mean_gaze_distortion(const ToyPipelineParams& params, const DomainData& data) {
  check_data(data, params.image_dim());
  const MatrixXd a = params.extractor.apply_columns(params.shift(data.images));
  CompensatedSum total;
  for (std::size_t i = 0; i < data.size(); ++i)
    total.add(gaze_term(a(0, static_cast<Index>(i)), a(1, static_cast<Index>(i)),
                        as_eigen(gaze_to_vector(data.labels[i])), nullptr));
  return total.value() / static_cast<double>(data.size());
}

double mean_reconstruction(const ToyPipelineParams& params, const DomainData& data) {
  check_data(data, params.image_dim());
  const MatrixXd diff = data.images - params.shift(data.images);
  CompensatedSum total;
  for (Index i = 0; i < diff.cols(); ++i) total.add(diff.col(i).squaredNorm());
  return total.value() / static_cast<double>(data.size());
}

FeatureMap identity_features() {
  return [](const VectorXd& x) { return x; };
}

double domain_gap(const FeatureMap& features, const MatrixXd& shifted_targets,
                  const MatrixXd& source) {
  if (shifted_targets.cols() == 0 || source.cols() == 0)
    fail(ErrorKind::kInsufficientData, "domain gap needs nonempty sets");
  if (shifted_targets.rows() != source.rows())
    fail(ErrorKind::kStructural, "domain gap sets differ in dimension");
  auto feature_mean = [&](const MatrixXd& x) {
    VectorXd acc = features(x.col(0));
    for (Index i = 1; i < x.cols(); ++i) acc += features(x.col(i));
    return VectorXd(acc / static_cast<double>(x.cols()));
  };
  const VectorXd a = feature_mean(shifted_targets);
  const VectorXd b = feature_mean(source);
  if (a.size() != b.size()) fail(ErrorKind::kStructural, "feature map output sizes differ");
  return (a - b).norm();
}

double grad_check(const ToyPipelineParams& params, const VectorXd& image, const GazeLabel& label,
                  const LossWeights& weights, const PluggableLosses& plug) {
  constexpr double kStep = 1e-5;
  const PipelineGradients analytic = total_loss_gradients(params, image, label, weights, plug);
  ToyPipelineParams probe = params;
  double worst = 0.0;

  auto check = [&](double& slot, double grad) {
    const double saved = slot;
    slot = saved + kStep;
    const double up = total_loss(probe, image, label, weights, plug);
    slot = saved - kStep;
    const double down = total_loss(probe, image, label, weights, plug);
    slot = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double scale = std::max({1.0, std::abs(numeric), std::abs(grad)});
    worst = std::max(worst, std::abs(numeric - grad) / scale);
  };
  for (Index i = 0; i < probe.encoder.weight.size(); ++i)
    check(probe.encoder.weight.data()[i], analytic.encoder.weight.data()[i]);
  for (Index i = 0; i < probe.encoder.bias.size(); ++i)
    check(probe.encoder.bias(i), analytic.encoder.bias(i));
  for (Index i = 0; i < probe.extractor.weight.size(); ++i)
    check(probe.extractor.weight.data()[i], analytic.extractor.weight.data()[i]);
  for (Index i = 0; i < probe.extractor.bias.size(); ++i)
    check(probe.extractor.bias(i), analytic.extractor.bias(i));
  return worst;
}

double random_grad_check(std::uint64_t seed, std::size_t n_configs) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto gaussian = [&](Index rows, Index cols, double scale) {
    MatrixXd m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * normal(engine);
    return m;
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < n_configs; ++k) {
    const auto m = static_cast<Index>(3 + engine() % 10);
    const auto d = static_cast<Index>(1 + engine() % static_cast<std::uint64_t>(m));
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    ToyPipelineParams p(AffineMap{gaussian(d, m, scale), gaussian(d, 1, 0.1)},
                        AffineMap{gaussian(m, d, 1.0), gaussian(m, 1, 0.1)},
                        AffineMap{gaussian(2, m, 0.5 * scale), gaussian(2, 1, 0.1)});
    const VectorXd image = gaussian(m, 1, 1.0);
    const GazeLabel label{-80.0 + 160.0 * unit(engine), -40.0 + 80.0 * unit(engine)};
    const LossWeights w{2.0 * unit(engine), 0.0, 0.0, 2.0 * unit(engine)};
    worst = std::max(worst, grad_check(p, image, label, w));
  }
  return worst;
}

ShiftExperimentResult run_shift_experiment(const DomainPair& data,
                                           const ShiftExperimentConfig& config) {
  validate(config.weights);
  ToyPipelineParams initial = build_pipeline(data.source, config.latent_dim, config.seed);
  ShiftTrainResult phase1 = train_extractor(std::move(initial), data.source, config.extractor);
  ShiftTrainResult phase2 =
      train_encoder(std::move(phase1.params), data.source, config.weights, config.encoder);
  check_data(data.target, phase2.params.image_dim());

  ShiftExperimentResult out{std::move(phase2.params), std::move(phase1.loss_curve),
                            std::move(phase2.loss_curve)};
  out.heldout_gaze_distortion = mean_gaze_distortion(out.params, data.target);
  out.heldout_reconstruction = mean_reconstruction(out.params, data.target);
  const FeatureMap identity = identity_features();
  out.gap_raw = domain_gap(identity, data.target.images, data.source.images);
  out.gap_shifted = domain_gap(identity, out.params.shift(data.target.images), data.source.images);
  return out;
}

}  // namespace gazechunk
