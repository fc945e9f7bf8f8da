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

#include "gazechunk/statedit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gazechunk {

SelectionMask::SelectionMask(LatentLayout layout, std::vector<std::size_t> chunk_indices)
    : layout_(layout), indices_(std::move(chunk_indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    fail(ErrorKind::kStructural, "selection mask repeats a chunk index");
  if (!indices_.empty() && indices_.back() >= layout_.n_chunks())
    fail(ErrorKind::kStructural, "selection mask index " + std::to_string(indices_.back()) +
                                     " out of range for " + std::to_string(layout_.n_chunks()) +
                                     " chunks");
}

SelectionMask SelectionMask::all(const LatentLayout& layout) {
  std::vector<std::size_t> idx(layout.n_chunks());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return SelectionMask(layout, std::move(idx));
}

bool SelectionMask::contains(std::size_t chunk) const {
  return std::binary_search(indices_.begin(), indices_.end(), chunk);
}

SelectionMask SelectionMask::complement() const {
  std::vector<std::size_t> out;
  out.reserve(layout_.n_chunks() - indices_.size());
  for (std::size_t c = 0; c < layout_.n_chunks(); ++c)
    if (!contains(c)) out.push_back(c);
  return SelectionMask(layout_, std::move(out));
}

SelectionMask AnalysisReport::selection() const {
  std::vector<std::size_t> idx;
  for (std::size_t c = 0; c < selected.size(); ++c)
    if (selected[c]) idx.push_back(c);
  return SelectionMask(layout, std::move(idx));
}

GroupSplit split_groups(const LatentDataset& dataset, DegreeRange left_range,
                        DegreeRange right_range) {
  if (left_range.lo > left_range.hi || right_range.lo > right_range.hi)
    fail(ErrorKind::kConfiguration, "group range has lo > hi");
  if (left_range.overlaps(right_range))
    fail(ErrorKind::kConfiguration, "left and right yaw ranges overlap");

  GroupSplit split;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double yaw = dataset.label(i).yaw_deg;
    if (left_range.contains(yaw))
      split.left.push_back(i);
    else if (right_range.contains(yaw))
      split.right.push_back(i);
    else
      split.excluded.push_back(i);
  }
  return split;
}

namespace {

// Two-pass mean and unbiased variance of every chunk over the given rows.
void accumulate_group(const LatentDataset& dataset, std::span<const std::size_t> rows,
                      std::vector<double>& mean, std::vector<double>& var) {
  const LatentLayout& layout = dataset.layout();
  const std::size_t k = layout.n_chunks();
  std::vector<double> per_sample(rows.size() * k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto m = chunk_means(layout, dataset.code(rows[r]));
    std::copy(m.begin(), m.end(), per_sample.begin() + static_cast<std::ptrdiff_t>(r * k));
  }

  const double n = static_cast<double>(rows.size());
  mean.assign(k, 0.0);
  var.assign(k, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < k; ++c) mean[c] += per_sample[r * k + c];
  for (double& m : mean) m /= n;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < k; ++c) {
      const double d = per_sample[r * k + c] - mean[c];
      var[c] += d * d;
    }
  for (double& v : var) v /= (n - 1.0);
}

}  // namespace

ChunkStats group_chunk_stats(const LatentDataset& dataset, const GroupSplit& split) {
  if (split.left.size() < 2 || split.right.size() < 2)
    fail(ErrorKind::kInsufficientData,
         "each group needs at least 2 samples (left " + std::to_string(split.left.size()) +
             ", right " + std::to_string(split.right.size()) + ")");
  ChunkStats stats;
  stats.n_left = split.left.size();
  stats.n_right = split.right.size();
  accumulate_group(dataset, split.left, stats.mean_left, stats.var_left);
  accumulate_group(dataset, split.right, stats.mean_right, stats.var_right);
  return stats;
}

std::vector<double> t_statistic(const ChunkStats& stats) {
  if (stats.n_left < 2 || stats.n_right < 2)
    fail(ErrorKind::kInsufficientData, "t statistic needs at least 2 samples per group");
  const double nl = static_cast<double>(stats.n_left);
  const double nr = static_cast<double>(stats.n_right);
  std::vector<double> t(stats.n_chunks());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double se =
        std::sqrt(stats.var_left[i] / nl + stats.var_right[i] / nr + kWelchEpsilon);
    t[i] = (stats.mean_left[i] - stats.mean_right[i]) / se;
  }
  return t;
}

double p_value(double t) {
  if (!std::isfinite(t)) fail(ErrorKind::kDomain, "p_value needs a finite statistic");
  // 2 (1 - Phi(|t|)) = erfc(|t| / sqrt(2))
  return std::min(1.0, std::erfc(std::abs(t) / std::sqrt(2.0)));
}

std::vector<std::size_t> rank_chunks(std::span<const double> t_stats) {
  std::vector<std::size_t> order(t_stats.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(t_stats[a]) > std::abs(t_stats[b]);
  });
  std::vector<std::size_t> rank(t_stats.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  return rank;
}

namespace {

std::vector<bool> selected_flags(const AnalysisReport& report, const SelectionMode& mode) {
  const std::size_t k = report.n_chunks();
  std::vector<bool> flags(k, false);
  if (mode.kind == SelectionMode::Kind::kTopN) {
    if (mode.count > k)
      fail(ErrorKind::kConfiguration, "top_n " + std::to_string(mode.count) + " exceeds " +
                                          std::to_string(k) + " chunks");
    for (std::size_t c = 0; c < k; ++c) flags[c] = report.rank[c] <= mode.count;
  } else {
    if (!(mode.alpha > 0.0 && mode.alpha < 1.0))
      fail(ErrorKind::kConfiguration, "alpha must lie in (0, 1)");
    for (std::size_t c = 0; c < k; ++c) flags[c] = report.p_value[c] < mode.alpha;
  }
  return flags;
}

}  // namespace

SelectionMask select_chunks(const AnalysisReport& report, const SelectionMode& mode) {
  auto flags = selected_flags(report, mode);
  std::vector<std::size_t> idx;
  for (std::size_t c = 0; c < flags.size(); ++c)
    if (flags[c]) idx.push_back(c);
  return SelectionMask(report.layout, std::move(idx));
}

void reselect(AnalysisReport& report, const SelectionMode& mode) {
  report.selected = selected_flags(report, mode);
  report.config.selection = mode;
}

AnalysisReport analyze(const LatentDataset& dataset, const AnalysisConfig& config) {
  if (dataset.empty()) fail(ErrorKind::kInsufficientData, "dataset is empty");

  const GroupSplit split = split_groups(dataset, config.left_range, config.right_range);
  const ChunkStats stats = group_chunk_stats(dataset, split);

  AnalysisReport report;
  report.layout = dataset.layout();
  report.config = config;
  report.n_left = split.left.size();
  report.n_right = split.right.size();
  report.n_excluded = split.excluded.size();
  report.mean_left = stats.mean_left;
  report.mean_right = stats.mean_right;
  report.var_left = stats.var_left;
  report.var_right = stats.var_right;
  report.mean_difference.resize(stats.n_chunks());
  for (std::size_t c = 0; c < stats.n_chunks(); ++c)
    report.mean_difference[c] = stats.mean_left[c] - stats.mean_right[c];

  report.t_stat = t_statistic(stats);
  report.p_value.resize(report.t_stat.size());
  std::transform(report.t_stat.begin(), report.t_stat.end(), report.p_value.begin(),
                 [](double t) { return p_value(t); });
  report.rank = rank_chunks(report.t_stat);
  report.selected = selected_flags(report, config.selection);

  if (report.n_left < kSmallGroupWarning || report.n_right < kSmallGroupWarning)
    report.warnings.push_back("group sizes (" + std::to_string(report.n_left) + ", " +
                              std::to_string(report.n_right) +
                              ") are below 30; normal critical values are approximate");
  return report;
}

}  // namespace gazechunk
