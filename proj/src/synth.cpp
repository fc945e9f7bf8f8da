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

#include "gazechunk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace gazechunk {

std::vector<std::size_t> default_planted_chunks(const LatentLayout& layout) {
  std::vector<std::size_t> out;
  const std::size_t per_layer = layout.chunks_per_layer();
  for (std::size_t layer = 4; layer <= 5 && layer < layout.n_layers(); ++layer)
    for (std::size_t j = 0; j < per_layer; ++j) out.push_back(layer * per_layer + j);
  return out;
}

namespace {

void check_range(const DegreeRange& r, double bound, const char* what) {
  if (!(r.lo <= r.hi) || r.lo < -bound || r.hi > bound)
    fail(ErrorKind::kConfiguration, std::string(what) + " range must satisfy -" +
                                        std::to_string(bound) + " <= lo <= hi <= " +
                                        std::to_string(bound));
}

std::mt19937_64 sample_engine(std::uint64_t seed, Domain domain, std::size_t index) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(domain == Domain::kSource ? 0x5u : 0x7u),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

void validate(const SynthSpec& spec) {
  const std::size_t k = spec.layout.n_chunks();
  if (spec.n_samples < 4) fail(ErrorKind::kConfiguration, "n_samples must be at least 4");
  if (!(spec.noise_std > 0.0) || !std::isfinite(spec.noise_std))
    fail(ErrorKind::kConfiguration, "noise_std must be positive and finite");
  if (!std::isfinite(spec.effect_size))
    fail(ErrorKind::kConfiguration, "effect_size must be finite");
  check_range(spec.yaw_range, 180.0, "yaw");
  check_range(spec.pitch_range, 90.0, "pitch");

  std::vector<int> owner(k, 0);  // 0 free, 1 planted, 2 nuisance
  for (std::size_t c : spec.planted_chunks) {
    if (c >= k) fail(ErrorKind::kConfiguration, "planted chunk " + std::to_string(c) + " out of range");
    if (owner[c] != 0) fail(ErrorKind::kConfiguration, "planted chunk " + std::to_string(c) + " repeated");
    owner[c] = 1;
  }
  for (const auto& nd : spec.nuisance) {
    if (!std::isfinite(nd.train_corr) || !std::isfinite(nd.test_corr))
      fail(ErrorKind::kConfiguration, "nuisance correlations must be finite");
    for (std::size_t c : nd.chunks) {
      if (c >= k) fail(ErrorKind::kConfiguration, "nuisance chunk " + std::to_string(c) + " out of range");
      if (owner[c] != 0)
        fail(ErrorKind::kConfiguration,
             "nuisance chunk " + std::to_string(c) + " overlaps a planted or nuisance chunk");
      owner[c] = 2;
    }
  }
  for (const auto& od : spec.offsets) {
    if (!std::isfinite(od.shift)) fail(ErrorKind::kConfiguration, "offset shift must be finite");
    for (std::size_t c : od.chunks)
      if (c >= k) fail(ErrorKind::kConfiguration, "offset chunk " + std::to_string(c) + " out of range");
  }
  for (const auto& ad : spec.appearance) {
    if (!(ad.scale >= 0.0) || !std::isfinite(ad.scale))
      fail(ErrorKind::kConfiguration, "appearance scale must be finite and non-negative");
    for (std::size_t c : ad.chunks)
      if (c >= k)
        fail(ErrorKind::kConfiguration, "appearance chunk " + std::to_string(c) + " out of range");
  }
}

LatentDataset generate(const SynthSpec& spec, Domain domain) {
  validate(spec);
  const LatentLayout& layout = spec.layout;
  const std::size_t k = layout.n_chunks();
  const std::size_t cs = layout.chunk_size();

  // Per-chunk yaw coefficient and constant shift, both in noise_std units.
  std::vector<double> yaw_coef(k, 0.0);
  std::vector<double> shift(k, 0.0);
  for (std::size_t c : spec.planted_chunks) yaw_coef[c] = spec.effect_size;
  for (const auto& nd : spec.nuisance)
    for (std::size_t c : nd.chunks)
      yaw_coef[c] = domain == Domain::kSource ? nd.train_corr : nd.test_corr;
  for (const auto& od : spec.offsets)
    for (std::size_t c : od.chunks) shift[c] += od.shift;

  LatentDataset out(layout);
  out.reserve(spec.n_samples);
  std::vector<double> values(layout.total_dims());
  const std::string prefix = domain == Domain::kSource ? "s" : "t";
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    auto engine = sample_engine(spec.seed, domain, i);
    std::uniform_real_distribution<double> yaw_dist(spec.yaw_range.lo, spec.yaw_range.hi);
    std::uniform_real_distribution<double> pitch_dist(spec.pitch_range.lo, spec.pitch_range.hi);
    std::normal_distribution<double> noise(0.0, spec.noise_std);

    const GazeLabel label{std::clamp(yaw_dist(engine), spec.yaw_range.lo, spec.yaw_range.hi),
                          std::clamp(pitch_dist(engine), spec.pitch_range.lo, spec.pitch_range.hi)};
    const double yaw_unit = label.yaw_deg / 90.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double mean = (yaw_coef[c] * yaw_unit + shift[c]) * spec.noise_std;
      for (std::size_t j = 0; j < cs; ++j) values[c * cs + j] = noise(engine) + mean;
    }
    // Drawn after the element noise so specs without appearance factors keep
    // their streams.
    for (const auto& ad : spec.appearance) {
      const double a = noise(engine) * ad.scale;
      for (std::size_t c : ad.chunks)
        for (std::size_t j = 0; j < cs; ++j) values[c * cs + j] += a;
    }
    out.add(prefix + std::to_string(i), values, label);
  }
  return out;
}

DomainPairSpec default_domain_pair(std::uint64_t seed) {
  DomainPairSpec pair;
  const LatentLayout layout;
  const std::size_t per_layer = layout.chunks_per_layer();
  NuisanceDescriptor nuisance;
  for (std::size_t c = 9 * per_layer; c < 11 * per_layer; ++c) nuisance.chunks.push_back(c);
  nuisance.train_corr = 0.8;
  nuisance.test_corr = 0.0;
  OffsetDescriptor offset;
  for (std::size_t c = 11 * per_layer; c < 13 * per_layer; ++c) offset.chunks.push_back(c);
  offset.shift = 0.5;

  pair.source.nuisance = {nuisance};
  pair.source.n_samples = 3000;
  pair.source.seed = seed;
  pair.target = pair.source;
  pair.target.offsets = {offset};
  pair.target.n_samples = 1000;
  return pair;
}

DomainPairSpec toy_domain_pair(std::uint64_t seed) {
  DomainPairSpec pair;
  const LatentLayout layout(4, 64, 16);
  const std::size_t per_layer = layout.chunks_per_layer();
  auto layer = [&](std::size_t l) {
    std::vector<std::size_t> out;
    for (std::size_t c = l * per_layer; c < (l + 1) * per_layer; ++c) out.push_back(c);
    return out;
  };
  pair.source.layout = layout;
  pair.source.planted_chunks = layer(1);
  pair.source.nuisance = {{layer(2), 0.8, 0.0}};
  for (std::size_t j = 0; j < per_layer; ++j)
    pair.source.appearance.push_back({{j, per_layer + j}, 3.0});
  pair.source.n_samples = 1000;
  pair.source.seed = seed;
  pair.target = pair.source;
  pair.target.offsets = {{layer(3), 0.5}};
  pair.target.n_samples = 500;
  return pair;
}

std::pair<LatentDataset, LatentDataset> generate_domain_pair(const DomainPairSpec& spec) {
  if (!(spec.source.layout == spec.target.layout))
    fail(ErrorKind::kConfiguration, "domain pair specs must share a layout");
  auto sorted = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  if (sorted(spec.source.planted_chunks) != sorted(spec.target.planted_chunks) ||
      spec.source.effect_size != spec.target.effect_size)
    fail(ErrorKind::kConfiguration, "domain pair specs must share planted chunks and effect size");
  return {generate(spec.source, Domain::kSource), generate(spec.target, Domain::kTarget)};
}

OracleScore oracle_report(const SynthSpec& spec, const SelectionMask& mask) {
  if (!(mask.layout() == spec.layout))
    fail(ErrorKind::kStructural, "mask layout differs from the synth layout");
  OracleScore score;
  for (std::size_t c : spec.planted_chunks)
    if (mask.contains(c)) ++score.true_positives;
  const double tp = static_cast<double>(score.true_positives);
  score.precision = mask.empty() ? 1.0 : tp / static_cast<double>(mask.size());
  score.recall = spec.planted_chunks.empty() ? 1.0
                                             : tp / static_cast<double>(spec.planted_chunks.size());
  return score;
}

}  // namespace gazechunk
