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

// Discovery of gaze-relevant latent chunks.
//
// Samples are split by yaw into a left-staring and a right-staring group.
// Every chunk is reduced to one scalar per sample (its chunk mean), and the two
// groups are compared chunk by chunk with an unpaired two-sample statistic
//
//   T_i = (mean_L_i - mean_R_i) / sqrt(var_L_i / n_L + var_R_i / n_R + eps)
//
// where the variances are unbiased sample variances. Group sizes are assumed
// large enough for T to be treated as standard normal, so p-values and critical
// values come from the normal distribution, not Student's t. Chunks are ranked
// by |T| and selected either by rank or by p-value.

#ifndef GAZECHUNK_STATEDIT_HPP
#define GAZECHUNK_STATEDIT_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gazechunk/core.hpp"

namespace gazechunk {

/// Closed interval of yaw angles in degrees.
struct DegreeRange {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double deg) const { return deg >= lo && deg <= hi; }
  bool overlaps(const DegreeRange& other) const { return lo <= other.hi && other.lo <= hi; }

  friend bool operator==(const DegreeRange&, const DegreeRange&) = default;
};

struct GroupSplit {
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  std::vector<std::size_t> excluded;
};

/// Per-chunk group means and unbiased variances of the chunk-mean scalars.
struct ChunkStats {
  std::vector<double> mean_left;
  std::vector<double> mean_right;
  std::vector<double> var_left;
  std::vector<double> var_right;
  std::size_t n_left = 0;
  std::size_t n_right = 0;

  std::size_t n_chunks() const { return mean_left.size(); }
};

struct SelectionMode {
  enum class Kind { kTopN, kAlpha };

  Kind kind = Kind::kTopN;
  std::size_t count = 64;
  double alpha = 0.05;

  static SelectionMode top_n(std::size_t count) { return {Kind::kTopN, count, 0.05}; }
  static SelectionMode alpha_level(double level) { return {Kind::kAlpha, 0, level}; }

  friend bool operator==(const SelectionMode&, const SelectionMode&) = default;
};

struct AnalysisConfig {
  DegreeRange left_range{30.0, 90.0};
  DegreeRange right_range{-90.0, -30.0};
  SelectionMode selection = SelectionMode::top_n(64);
};

/// Ordered set of chunk indices under a layout: the edit/selection operator.
class SelectionMask {
 public:
  explicit SelectionMask(LatentLayout layout) : layout_(layout) {}
  /// Indices are sorted and must be unique and < n_chunks.
  SelectionMask(LatentLayout layout, std::vector<std::size_t> chunk_indices);

  static SelectionMask all(const LatentLayout& layout);

  const LatentLayout& layout() const { return layout_; }
  std::span<const std::size_t> chunk_indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t chunk) const;
  SelectionMask complement() const;

  friend bool operator==(const SelectionMask&, const SelectionMask&) = default;

 private:
  LatentLayout layout_;
  std::vector<std::size_t> indices_;
};

struct AnalysisReport {
  LatentLayout layout;
  AnalysisConfig config;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::size_t n_excluded = 0;

  // Per chunk, indexed by chunk.
  std::vector<double> mean_left;
  std::vector<double> mean_right;
  std::vector<double> var_left;
  std::vector<double> var_right;
  std::vector<double> mean_difference;  // mean_left - mean_right
  std::vector<double> t_stat;
  std::vector<double> p_value;
  std::vector<std::size_t> rank;  // 1 = largest |t|
  std::vector<bool> selected;

  std::vector<std::string> warnings;

  std::size_t n_chunks() const { return t_stat.size(); }
  SelectionMask selection() const;
};

inline constexpr double kWelchEpsilon = 1e-12;

/// Groups with fewer samples than this get a warning: the normal
/// approximation behind the p-values is weak there.
inline constexpr std::size_t kSmallGroupWarning = 30;

/// Assigns each sample to left, right or excluded by yaw; endpoints are
/// inclusive. Overlapping or inverted ranges are a configuration error.
GroupSplit split_groups(const LatentDataset& dataset,
                        DegreeRange left_range = {30.0, 90.0},
                        DegreeRange right_range = {-90.0, -30.0});

/// Throws kInsufficientData when either group has fewer than two samples.
ChunkStats group_chunk_stats(const LatentDataset& dataset, const GroupSplit& split);

std::vector<double> t_statistic(const ChunkStats& stats);

/// Two-sided standard-normal tail probability 2 (1 - Phi(|t|)).
double p_value(double t);

/// Ranks by |t| descending, ties broken by lower index. Element i is the
/// 1-based rank of chunk i.
std::vector<std::size_t> rank_chunks(std::span<const double> t_stats);

SelectionMask select_chunks(const AnalysisReport& report, const SelectionMode& mode);

/// Re-applies a selection mode to an existing report, updating the selected
/// flags and the stored configuration.
void reselect(AnalysisReport& report, const SelectionMode& mode);

/// split -> stats -> t -> p -> rank -> select.
AnalysisReport analyze(const LatentDataset& dataset, const AnalysisConfig& config);

}  // namespace gazechunk

#endif  // GAZECHUNK_STATEDIT_HPP
