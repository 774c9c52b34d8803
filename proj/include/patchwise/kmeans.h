// Copyright 2026-present the patchwise project
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace patchwise {

struct KMeansOptions {
    std::size_t k = 1;
    std::uint64_t seed = 0;
    int max_iters = 25;
    /// Stop once an iteration improves the objective by at most this
    /// fraction of its previous value.
    double tolerance = 1e-4;
};

struct KMeansResult {
    std::size_t k = 0;
    std::size_t dim = 0;
    /// Row-major k x dim.
    std::vector<float> centroids;
    std::vector<std::uint32_t> assignment;
    /// Sum of squared distances after every assignment step.
    std::vector<double> objective;
    int iterations = 0;
    std::vector<std::string> warnings;

    std::span<const float> centroid(std::size_t c) const noexcept { return {&centroids[c * dim], dim}; }
};

/// Lloyd iterations under squared L2 with k-means++ seeding. Empty clusters
/// are re-seeded with the point farthest from its centroid. When k exceeds
/// the number of distinct points, duplicate centroids are produced and a
/// warning is recorded.
KMeansResult kmeans(std::span<const float> points, std::size_t dim, const KMeansOptions& options);

/// Index of the nearest centroid under squared L2, lowest index on ties.
std::uint32_t nearest_centroid(std::span<const float> centroids, std::size_t dim, std::span<const float> v,
                               double* distance = nullptr);

/// Number of distinct rows, compared bit-for-bit.
std::size_t count_distinct(std::span<const float> points, std::size_t dim);

}  // namespace patchwise
