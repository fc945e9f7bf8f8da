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

#include "gazechunk/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace gazechunk {

LatentLayout::LatentLayout(std::size_t n_layers, std::size_t layer_dim, std::size_t chunk_size)
    : n_layers_(n_layers), layer_dim_(layer_dim), chunk_size_(chunk_size) {
  if (n_layers == 0 || layer_dim == 0 || chunk_size == 0)
    fail(ErrorKind::kConfiguration, "latent layout dimensions must be positive");
  if (layer_dim % chunk_size != 0)
    fail(ErrorKind::kConfiguration, "layer_dim " + std::to_string(layer_dim) +
                                        " is not divisible by chunk_size " +
                                        std::to_string(chunk_size));
}

std::string to_string(const LatentLayout& layout) {
  return std::to_string(layout.n_layers()) + "x" + std::to_string(layout.layer_dim()) + "/" +
         std::to_string(layout.chunk_size());
}

namespace {

void require_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) fail(ErrorKind::kDomain, "latent code contains a non-finite value");
}

}  // namespace

LatentCode::LatentCode(LatentLayout layout)
    : layout_(layout), values_(layout.total_dims(), 0.0) {}

LatentCode::LatentCode(LatentLayout layout, std::vector<double> values)
    : layout_(layout), values_(std::move(values)) {
  if (values_.size() != layout_.total_dims())
    fail(ErrorKind::kStructural, "latent code has " + std::to_string(values_.size()) +
                                     " values, layout " + to_string(layout_) + " needs " +
                                     std::to_string(layout_.total_dims()));
  require_finite(values_);
}

void validate(const GazeLabel& label) {
  if (!(label.yaw_deg >= -180.0 && label.yaw_deg <= 180.0))
    fail(ErrorKind::kDomain, "yaw " + std::to_string(label.yaw_deg) + " outside [-180, 180]");
  if (!(label.pitch_deg >= -90.0 && label.pitch_deg <= 90.0))
    fail(ErrorKind::kDomain, "pitch " + std::to_string(label.pitch_deg) + " outside [-90, 90]");
}

void LatentDataset::reserve(std::size_t n) {
  ids_.reserve(n);
  id_index_.reserve(n);
  labels_.reserve(n);
  values_.reserve(n * layout_.total_dims());
}

void LatentDataset::add(std::string id, const LatentCode& code, const GazeLabel& label) {
  if (!(code.layout() == layout_))
    fail(ErrorKind::kStructural, "code layout " + to_string(code.layout()) +
                                     " differs from dataset layout " + to_string(layout_));
  add(std::move(id), code.values(), label);
}

void LatentDataset::add(std::string id, std::span<const double> values, const GazeLabel& label) {
  if (values.size() != layout_.total_dims())
    fail(ErrorKind::kStructural, "sample has " + std::to_string(values.size()) +
                                     " values, dataset layout needs " +
                                     std::to_string(layout_.total_dims()));
  require_finite(values);
  validate(label);
  if (!id_index_.insert(id).second)
    fail(ErrorKind::kStructural, "duplicate sample id '" + id + "'");
  ids_.push_back(std::move(id));
  labels_.push_back(label);
  values_.insert(values_.end(), values.begin(), values.end());
}

std::span<const double> LatentDataset::code(std::size_t i) const {
  const std::size_t d = layout_.total_dims();
  return std::span<const double>(values_).subspan(i * d, d);
}

std::span<double> LatentDataset::mutable_code(std::size_t i) {
  const std::size_t d = layout_.total_dims();
  return std::span<double>(values_).subspan(i * d, d);
}

LatentCode LatentDataset::code_copy(std::size_t i) const {
  auto row = code(i);
  return LatentCode(layout_, std::vector<double>(row.begin(), row.end()));
}

void LatentDataset::set_labels(std::vector<GazeLabel> labels) {
  if (labels.size() != ids_.size())
    fail(ErrorKind::kStructural, "label count " + std::to_string(labels.size()) +
                                     " differs from sample count " + std::to_string(ids_.size()));
  for (const auto& l : labels) validate(l);
  labels_ = std::move(labels);
}

LatentDataset LatentDataset::subset(std::span<const std::size_t> rows) const {
  LatentDataset out(layout_);
  out.reserve(rows.size());
  std::unordered_set<std::size_t> seen;
  for (std::size_t r : rows) {
    if (r >= size()) fail(ErrorKind::kStructural, "subset row out of range");
    if (!seen.insert(r).second) fail(ErrorKind::kStructural, "subset repeats a row");
    out.ids_.push_back(ids_[r]);
    out.id_index_.insert(ids_[r]);
    out.labels_.push_back(labels_[r]);
    auto row = code(r);
    out.values_.insert(out.values_.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<double> chunk_means(const LatentLayout& layout, std::span<const double> values) {
  if (values.size() != layout.total_dims())
    fail(ErrorKind::kStructural, "code length " + std::to_string(values.size()) +
                                     " does not match layout " + to_string(layout));
  const std::size_t cs = layout.chunk_size();
  std::vector<double> means(layout.n_chunks());
  for (std::size_t i = 0; i < means.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cs; ++j) s += values[i * cs + j];
    means[i] = s / static_cast<double>(cs);
  }
  return means;
}

std::vector<double> chunk_means(const LatentCode& code) {
  return chunk_means(code.layout(), code.values());
}

Vec3 gaze_vector_from_radians(double yaw_rad, double pitch_rad) {
  const double cp = std::cos(pitch_rad);
  return {cp * std::sin(yaw_rad), std::sin(pitch_rad), cp * std::cos(yaw_rad)};
}

Vec3 gaze_to_vector(const GazeLabel& label) {
  validate(label);
  return gaze_vector_from_radians(deg_to_rad(label.yaw_deg), deg_to_rad(label.pitch_deg));
}

double angular_error(const Vec3& pred, const Vec3& truth) {
  const double np = std::hypot(pred[0], pred[1], pred[2]);
  const double nt = std::hypot(truth[0], truth[1], truth[2]);
  if (!(np > 0.0) || !(nt > 0.0))
    fail(ErrorKind::kDomain, "angular error needs nonzero vectors");
  // atan2(|a x b|, a . b) is the arccos of the clamped cosine, without the
  // loss of precision arccos has near 0 and 180 degrees.
  const double dot = pred[0] * truth[0] + pred[1] * truth[1] + pred[2] * truth[2];
  const double cx = pred[1] * truth[2] - pred[2] * truth[1];
  const double cy = pred[2] * truth[0] - pred[0] * truth[2];
  const double cz = pred[0] * truth[1] - pred[1] * truth[0];
  return rad_to_deg(std::atan2(std::hypot(cx, cy, cz), dot));
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    compensation_ += (sum_ - t) + x;
  else
    compensation_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace gazechunk
