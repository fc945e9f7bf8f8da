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


#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gazechunk/core.hpp"
#include "support/oracles.hpp"

namespace gazechunk {
namespace {

TEST(LatentLayout, DefaultShape) {
  const LatentLayout layout;
  EXPECT_EQ(layout.total_dims(), 7168u);
  EXPECT_EQ(layout.n_chunks(), 448u);
  EXPECT_EQ(layout.chunks_per_layer(), 32u);
  EXPECT_EQ(layout.layer_of_chunk(128), 4u);
  EXPECT_EQ(layout.layer_of_chunk(191), 5u);
}

TEST(LatentLayout, RejectsChunkSizeThatDoesNotDivideLayer) {
  try {
    LatentLayout(2, 10, 4);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfiguration);
  }
  EXPECT_THROW(LatentLayout(0, 16, 16), Error);
  EXPECT_THROW(LatentLayout(1, 16, 0), Error);
}

TEST(LatentCode, RejectsWrongLength) {
  EXPECT_THROW(LatentCode(LatentLayout(1, 4, 2), std::vector<double>(3)), Error);
}

TEST(ChunkMeans, ZeroCode) {
  const LatentCode code{LatentLayout{}};
  for (double m : chunk_means(code)) EXPECT_EQ(m, 0.0);
}

TEST(ChunkMeans, FirstChunkRamp) {
  LatentCode code{LatentLayout{}};
  for (int i = 0; i < 16; ++i) code[i] = i;
  EXPECT_DOUBLE_EQ(chunk_means(code)[0], 7.5);
}

TEST(ChunkMeans, MatchesWindowLoop) {
  const LatentLayout layout;
  std::mt19937_64 engine(11);
  std::normal_distribution<double> noise(0.0, 3.0);
  std::vector<double> values(layout.total_dims());
  for (double& v : values) v = noise(engine);
  const std::vector<double> got = chunk_means(layout, values);
  const std::vector<double> want = oracle::chunk_means_naive(layout, values);
  ASSERT_EQ(got.size(), 448u);
  for (std::size_t c = 0; c < got.size(); ++c)
    EXPECT_LE(std::abs(got[c] - want[c]), 1e-12 * std::max(1.0, std::abs(want[c]))) << c;
}

TEST(GazeVector, ConventionAnchors) {
  const Vec3 front = gaze_to_vector({0.0, 0.0});
  EXPECT_NEAR(front[0], 0.0, 1e-15);
  EXPECT_NEAR(front[1], 0.0, 1e-15);
  EXPECT_NEAR(front[2], 1.0, 1e-15);

  const Vec3 side = gaze_to_vector({90.0, 0.0});
  EXPECT_NEAR(side[0], 1.0, 1e-15);
  EXPECT_NEAR(side[2], 0.0, 1e-15);

  const Vec3 diag = gaze_to_vector({45.0, 0.0});
  EXPECT_NEAR(diag[0], std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(diag[2], std::sqrt(2.0) / 2.0, 1e-15);

  const Vec3 up = gaze_to_vector({0.0, 30.0});
  EXPECT_NEAR(up[1], 0.5, 1e-15);
}

TEST(GazeVector, UnitNorm) {
  std::mt19937_64 engine(3);
  std::uniform_real_distribution<double> yaw(-180.0, 180.0), pitch(-90.0, 90.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = gaze_to_vector({yaw(engine), pitch(engine)});
    EXPECT_NEAR(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]), 1.0, 1e-12);
  }
}

TEST(GazeVector, RejectsOutOfRangeLabels) {
  EXPECT_THROW(gaze_to_vector({181.0, 0.0}), Error);
  EXPECT_THROW(gaze_to_vector({0.0, -90.5}), Error);
  EXPECT_THROW(validate(GazeLabel{std::nan(""), 0.0}), Error);
}

TEST(AngularError, Examples) {
  EXPECT_EQ(angular_error({0, 0, 1}, {0, 0, 1}), 0.0);
  EXPECT_NEAR(angular_error({1, 0, 0}, {0, 0, 1}), 90.0, 1e-12);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(angular_error({1, 0, 0}, {r, r, 0}), 45.0, 1e-12);
  EXPECT_NEAR(angular_error({0, 0, 1}, {0, 0, -1}), 180.0, 1e-12);
}

TEST(AngularError, ScaleInvariantAndSymmetric) {
  std::mt19937_64 engine(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> s(0.01, 100.0);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a{n(engine), n(engine), n(engine)};
    const Vec3 b{n(engine), n(engine), n(engine)};
    const double k = s(engine);
    const double base = angular_error(a, b);
    EXPECT_NEAR(angular_error({k * a[0], k * a[1], k * a[2]}, b), base, 1e-9);
    EXPECT_NEAR(angular_error(b, a), base, 1e-12);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 180.0);
  }
}

TEST(AngularError, ZeroVectorIsDomainError) {
  try {
    angular_error({0, 0, 0}, {0, 0, 1});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
  }
}

TEST(LatentDataset, AddValidates) {
  const LatentLayout layout(1, 4, 2);
  LatentDataset ds(layout);
  ds.add("a", std::vector<double>{1, 2, 3, 4}, {10, 0});
  EXPECT_EQ(ds.size(), 1u);
  EXPECT_THROW(ds.add("a", std::vector<double>{1, 2, 3, 4}, {10, 0}), Error);
  EXPECT_THROW(ds.add("b", std::vector<double>{1, 2, 3}, {10, 0}), Error);
  EXPECT_THROW(ds.add("c", std::vector<double>{1, 2, std::numeric_limits<double>::infinity(), 4},
                      {10, 0}),
               Error);
  EXPECT_THROW(ds.add("d", std::vector<double>{1, 2, 3, 4}, {200, 0}), Error);
  EXPECT_EQ(ds.size(), 1u);
}

TEST(LatentDataset, SubsetKeepsOrder) {
  const LatentLayout layout(1, 2, 1);
  LatentDataset ds(layout);
  for (int i = 0; i < 5; ++i)
    ds.add(std::to_string(i), std::vector<double>{double(i), -double(i)}, {double(i), 0});
  const std::vector<std::size_t> rows{4, 1};
  const LatentDataset sub = ds.subset(rows);
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub.id(0), "4");
  EXPECT_EQ(sub.code(1)[1], -1.0);
  EXPECT_EQ(sub.label(0).yaw_deg, 4.0);
}

TEST(CompensatedSum, RecoversSmallTerms) {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1000.0);
}

}  // namespace
}  // namespace gazechunk
