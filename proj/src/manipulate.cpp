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

#include "gazechunk/manipulate.hpp"

#include <algorithm>

namespace gazechunk {

void replace_chunks_inplace(std::span<double> base, std::span<const double> donor,
                            const SelectionMask& mask) {
  const LatentLayout& layout = mask.layout();
  if (base.size() != layout.total_dims() || donor.size() != layout.total_dims())
    fail(ErrorKind::kStructural, "base, donor and mask must share layout " + to_string(layout));
  const std::size_t cs = layout.chunk_size();
  for (std::size_t c : mask.chunk_indices())
    std::copy_n(donor.begin() + static_cast<std::ptrdiff_t>(c * cs), cs,
                base.begin() + static_cast<std::ptrdiff_t>(c * cs));
}

LatentCode replace_chunks(const LatentCode& base, const LatentCode& donor,
                          const SelectionMask& mask) {
  if (!(base.layout() == mask.layout()) || !(donor.layout() == mask.layout()))
    fail(ErrorKind::kStructural, "base, donor and mask layouts differ");
  LatentCode out = base;
  replace_chunks_inplace(out.values(), donor.values(), mask);
  return out;
}

LatentCode group_mean_code(const LatentDataset& dataset, std::span<const std::size_t> group) {
  if (group.empty()) fail(ErrorKind::kInsufficientData, "group mean of an empty group");
  const std::size_t d = dataset.layout().total_dims();
  std::vector<double> sum(d, 0.0);
  for (std::size_t row : group) {
    if (row >= dataset.size()) fail(ErrorKind::kStructural, "group index out of range");
    auto code = dataset.code(row);
    for (std::size_t e = 0; e < d; ++e) sum[e] += code[e];
  }
  const double n = static_cast<double>(group.size());
  for (double& v : sum) v /= n;
  return LatentCode(dataset.layout(), std::move(sum));
}

LatentCode apply_recipe(const LatentCode& base, const ManipulationRecipe& recipe,
                        const DonorSource& donor) {
  switch (recipe.donor_policy) {
    case DonorPolicy::kFromCode:
      if (!donor.code) fail(ErrorKind::kConfiguration, "from_code recipe needs a donor code");
      return replace_chunks(base, *donor.code, recipe.mask);
    case DonorPolicy::kFromGroupMean:
      if (donor.dataset == nullptr)
        fail(ErrorKind::kConfiguration, "from_group_mean recipe needs a dataset and group");
      return replace_chunks(base, group_mean_code(*donor.dataset, donor.group), recipe.mask);
  }
  fail(ErrorKind::kConfiguration, "unknown donor policy");
}

}  // namespace gazechunk
