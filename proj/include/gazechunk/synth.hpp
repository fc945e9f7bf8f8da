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

// Synthetic latent datasets with a known set of gaze-relevant chunks.
//
// Every element is N(0, noise_std^2). Elements of planted chunks get an extra
// effect_size * (yaw / 90) * noise_std, and elements of nuisance chunks get
// corr * (yaw / 90) * noise_std where corr depends on the domain. Offsets add
// shift * noise_std to their chunks. Each sample draws from its own engine
// seeded by (seed, domain, sample index), so samples can be generated in any
// order or in parallel without changing the result.

#ifndef GAZECHUNK_SYNTH_HPP
#define GAZECHUNK_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gazechunk/core.hpp"
#include "gazechunk/statedit.hpp"

namespace gazechunk {

/// Chunks whose correlation with yaw differs between the training (source)
/// and test (target) domains.
struct NuisanceDescriptor {
  std::vector<std::size_t> chunks;
  double train_corr = 0.0;
  double test_corr = 0.0;
};

/// Constant additive shift on some chunks, in units of noise_std.
struct OffsetDescriptor {
  std::vector<std::size_t> chunks;
  double shift = 0.0;
};

/// A gaze-irrelevant per-sample factor shared by a chunk set: every sample
/// draws a ~ N(0, 1) and adds a * scale * noise_std to all elements of the
/// chunks. Models coarse gaze-irrelevant variation shared across chunks.
struct AppearanceDescriptor {
  std::vector<std::size_t> chunks;
  double scale = 0.0;
};

/// Chunk indices of layers 4 and 5 (0-based) under `layout`.
std::vector<std::size_t> default_planted_chunks(const LatentLayout& layout);

struct SynthSpec {
  LatentLayout layout;
  std::size_t n_samples = 6000;  // about 2000 per yaw group with the default ranges
  std::vector<std::size_t> planted_chunks = default_planted_chunks(LatentLayout{});
  double effect_size = 1.0;
  std::vector<NuisanceDescriptor> nuisance;
  std::vector<OffsetDescriptor> offsets;
  std::vector<AppearanceDescriptor> appearance;
  double noise_std = 1.0;
  DegreeRange yaw_range{-90.0, 90.0};
  DegreeRange pitch_range{-10.0, 10.0};
  std::uint64_t seed = 0;
};

/// Throws kConfiguration on out-of-range or overlapping chunk sets, bad
/// ranges, n_samples < 4 or non-positive noise.
void validate(const SynthSpec& spec);

enum class Domain { kSource, kTarget };

/// Source draws use each nuisance descriptor's train_corr, target draws its
/// test_corr.
LatentDataset generate(const SynthSpec& spec, Domain domain = Domain::kSource);

/// Source and target specs must share layout, planted chunks and effect size.
struct DomainPairSpec {
  SynthSpec source;
  SynthSpec target;
};

/// The pair used by the ablation experiments: a 64-chunk nuisance block on
/// layers 9-10 correlated with yaw at 0.8 in the source and 0 in the target,
/// plus a +0.5 offset on layers 11-12 in the target.
DomainPairSpec default_domain_pair(std::uint64_t seed);

/// Small pair for the shift pipeline: layout (4, 64, 16), planted layer 1,
/// nuisance on layer 2 (0.8 source, 0 target), +0.5 target offset on layer 3,
/// and four appearance factors of scale 3, factor j spanning chunk j of
/// layer 0 and chunk j of layer 1, so gaze shares pixels with stronger
/// gaze-irrelevant variation. 1000 source and 500 target samples.
DomainPairSpec toy_domain_pair(std::uint64_t seed);

std::pair<LatentDataset, LatentDataset> generate_domain_pair(const DomainPairSpec& spec);

struct OracleScore {
  double precision = 1.0;  // 1 for an empty mask by convention
  double recall = 0.0;
  std::size_t true_positives = 0;
};

OracleScore oracle_report(const SynthSpec& spec, const SelectionMask& mask);

}  // namespace gazechunk

#endif  // GAZECHUNK_SYNTH_HPP
