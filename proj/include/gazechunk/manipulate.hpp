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

#ifndef GAZECHUNK_MANIPULATE_HPP
#define GAZECHUNK_MANIPULATE_HPP

#include <cstddef>
#include <optional>
#include <span>

#include "gazechunk/core.hpp"
#include "gazechunk/statedit.hpp"

namespace gazechunk {

enum class DonorPolicy { kFromCode, kFromGroupMean };

struct ManipulationRecipe {
  SelectionMask mask;
  DonorPolicy donor_policy = DonorPolicy::kFromCode;
};

/// Copy of base whose masked chunks are taken from donor. Elements outside
/// the mask are bit-identical to base.
LatentCode replace_chunks(const LatentCode& base, const LatentCode& donor,
                          const SelectionMask& mask);

/// In-place variant over raw rows of a dataset.
void replace_chunks_inplace(std::span<double> base, std::span<const double> donor,
                            const SelectionMask& mask);

/// Elementwise mean of the codes in `group`.
LatentCode group_mean_code(const LatentDataset& dataset, std::span<const std::size_t> group);

/// Where the donor comes from for apply_recipe.
struct DonorSource {
  std::optional<LatentCode> code;                    // kFromCode
  const LatentDataset* dataset = nullptr;            // kFromGroupMean
  std::span<const std::size_t> group;                // kFromGroupMean
};

LatentCode apply_recipe(const LatentCode& base, const ManipulationRecipe& recipe,
                        const DonorSource& donor);

}  // namespace gazechunk

#endif  // GAZECHUNK_MANIPULATE_HPP
