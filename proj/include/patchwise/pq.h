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
#include <string_view>
#include <vector>

#include "patchwise/descriptor.h"
#include "patchwise/embedding_io.h"
#include "patchwise/geometry.h"

namespace patchwise {

inline constexpr int kPqBits = 8;
inline constexpr std::size_t kSubCentroids = 256;

struct PQParams {
    std::size_t m = 16;
    std::size_t nlist = 64;
    int nbits = kPqBits;
    std::size_t nprobe = 8;

    /// Throws unless d mod m = 0, nbits = 8, nlist >= 1 and nprobe >= 1.
    void validate(std::size_t dim) const;
    friend bool operator==(const PQParams&, const PQParams&) = default;
};

/// Parses "m,nlist,nbits".
PQParams parse_pq_params(std::string_view text);

struct Codebook {
    std::size_t dim = 0;
    std::size_t m = 0;
    std::size_t nlist = 0;
    /// Row-major nlist x dim, unit length.
    std::vector<float> coarse;
    /// Row-major m x 256 x (dim / m).
    std::vector<float> sub;
    std::uint64_t seed = 0;
    std::string pool_tag;

    std::size_t dsub() const noexcept { return dim / m; }
    std::span<const float> coarse_centroid(std::size_t c) const noexcept { return {&coarse[c * dim], dim}; }
    std::span<const float> sub_centroid(std::size_t j, std::size_t c) const noexcept {
        return {&sub[(j * kSubCentroids + c) * dsub()], dsub()};
    }

    /// Throws unless the table sizes agree with dim, m and nlist.
    void check() const;
    friend bool operator==(const Codebook&, const Codebook&) = default;
};

struct PQCode {
    std::uint32_t list = 0;
    std::vector<std::uint8_t> codes;
    friend bool operator==(const PQCode&, const PQCode&) = default;
};

/// Coarse centroids come from k-means over the pool with nlist clusters
/// (clamped to the pool size) and are rescaled to unit length; subquantizer j
/// is k-means with 256 clusters over the j-th slices. Warnings about clamping
/// and duplicate centroids are appended to warnings when given.
Codebook train_codebook(std::span<const Descriptor> pool, const PQParams& params, std::uint64_t seed,
                        std::string pool_tag, std::vector<std::string>* warnings = nullptr);

/// Coarse list with the highest inner product, lowest id on ties.
std::uint32_t coarse_assign(const Codebook& cb, std::span<const float> v);

/// Sub-codes quantize the raw vector slice by slice (no residual).
PQCode encode(const Codebook& cb, std::span<const float> v);
std::vector<float> decode(const Codebook& cb, const PQCode& code);

/// Row-major m x 256 table of slice inner products with every sub-centroid.
std::vector<double> adc_tables(const Codebook& cb, std::span<const float> query);

/// Sum over subquantizers of table[j][codes[j]].
double adc_score(std::span<const double> tables, std::span<const std::uint8_t> codes);

struct PoolStrategy {
    enum class Kind : std::uint8_t { kLevel, kGroundTruth };
    Kind kind = Kind::kLevel;
    PatchLevel level = PatchLevel::kL3;
    friend bool operator==(const PoolStrategy&, const PoolStrategy&) = default;
};

/// Parses "l0".."l3" or "gt".
PoolStrategy parse_pool_strategy(std::string_view text);
std::string pool_strategy_name(const PoolStrategy& strategy);

/// Grid side g when the region is a 1/g x 1/g square (within 1e-4), else 0.
int region_scale(const NormRect& region);

/// Level strategy: every patch whose scale is at most the level's largest
/// grid. Ground-truth strategy: one descriptor per distinct (image, box), the
/// stored crop descriptor when its region maps to the box, otherwise the
/// patch with the highest IoU against the box (lowest patch id on ties).
std::vector<Descriptor> select_training_pool(std::span<const ImageRecord> records, const PoolStrategy& strategy,
                                             std::span<const GroundTruthPositive> gt_boxes = {});

}  // namespace patchwise
