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

// Domain types shared by every module: the latent layout and its chunk
// arithmetic, latent codes and datasets, gaze labels, and the angular-error
// metric.
//
// Gaze vectors use a camera frame with +x right, +y up and +z forward. Yaw
// rotates about y and pitch about x, so (yaw, pitch) maps to
//   (cos(pitch) sin(yaw), sin(pitch), cos(pitch) cos(yaw)).

#ifndef GAZECHUNK_CORE_HPP
#define GAZECHUNK_CORE_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "gazechunk/error.hpp"

namespace gazechunk {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Shape of a latent code: n_layers style layers of layer_dim elements each,
/// statistically analysed in consecutive windows of chunk_size elements.
class LatentLayout {
 public:
  /// 14 x 512 elements in chunks of 16, i.e. 448 chunks.
  LatentLayout() : LatentLayout(14, 512, 16) {}
  LatentLayout(std::size_t n_layers, std::size_t layer_dim, std::size_t chunk_size);

  std::size_t n_layers() const { return n_layers_; }
  std::size_t layer_dim() const { return layer_dim_; }
  std::size_t chunk_size() const { return chunk_size_; }
  std::size_t total_dims() const { return n_layers_ * layer_dim_; }
  std::size_t n_chunks() const { return total_dims() / chunk_size_; }
  std::size_t chunks_per_layer() const { return layer_dim_ / chunk_size_; }
  std::size_t layer_of_chunk(std::size_t chunk) const { return chunk / chunks_per_layer(); }

  friend bool operator==(const LatentLayout&, const LatentLayout&) = default;

 private:
  std::size_t n_layers_;
  std::size_t layer_dim_;
  std::size_t chunk_size_;
};

std::string to_string(const LatentLayout& layout);

/// One latent vector together with the layout it was produced under.
class LatentCode {
 public:
  explicit LatentCode(LatentLayout layout);  // all zeros
  LatentCode(LatentLayout layout, std::vector<double> values);

  const LatentLayout& layout() const { return layout_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  friend bool operator==(const LatentCode&, const LatentCode&) = default;

 private:
  LatentLayout layout_;
  std::vector<double> values_;
};

/// Yaw/pitch gaze direction in degrees.
struct GazeLabel {
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;

  friend bool operator==(const GazeLabel&, const GazeLabel&) = default;
};

using Vec3 = std::array<double, 3>;

/// Throws kDomain unless yaw is in [-180, 180] and pitch in [-90, 90].
void validate(const GazeLabel& label);

/// Labelled latent codes sharing one layout. Codes are stored row-major in a
/// single buffer; rows are exposed as spans.
class LatentDataset {
 public:
  LatentDataset() = default;
  explicit LatentDataset(LatentLayout layout) : layout_(layout) {}

  const LatentLayout& layout() const { return layout_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  /// Appends a sample. Rejects layout mismatches, non-finite values, labels
  /// out of range and duplicate ids.
  void add(std::string id, const LatentCode& code, const GazeLabel& label);
  void add(std::string id, std::span<const double> values, const GazeLabel& label);
  void reserve(std::size_t n);

  std::span<const double> code(std::size_t i) const;
  std::span<double> mutable_code(std::size_t i);
  LatentCode code_copy(std::size_t i) const;
  const GazeLabel& label(std::size_t i) const { return labels_[i]; }
  const std::string& id(std::size_t i) const { return ids_[i]; }

  std::span<const GazeLabel> labels() const { return labels_; }
  std::span<const std::string> ids() const { return ids_; }
  std::span<const double> raw_values() const { return values_; }

  /// Replaces all labels, keeping ids and codes. Sizes must match.
  void set_labels(std::vector<GazeLabel> labels);

  /// New dataset holding the given rows, in order.
  LatentDataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const LatentDataset&, const LatentDataset&) = default;

 private:
  LatentLayout layout_;
  std::vector<std::string> ids_;
  std::unordered_set<std::string> id_index_;
  std::vector<GazeLabel> labels_;
  std::vector<double> values_;
};

/// Mean of each chunk_size window of the code; length n_chunks.
std::vector<double> chunk_means(const LatentCode& code);
std::vector<double> chunk_means(const LatentLayout& layout, std::span<const double> values);

Vec3 gaze_to_vector(const GazeLabel& label);

/// Same convention as gaze_to_vector, angles in radians and unchecked.
Vec3 gaze_vector_from_radians(double yaw_rad, double pitch_rad);

/// Angle between two nonzero vectors in degrees, i.e. arccos of their
/// cosine similarity clamped to [-1, 1]. Throws kDomain on a zero vector.
double angular_error(const Vec3& pred, const Vec3& truth);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace gazechunk

#endif  // GAZECHUNK_CORE_HPP
