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
#include "patchwise/ranking.h"

namespace patchwise {

/// Database-side patch row: owning image ordinal and patch attribution.
struct PatchRow {
    std::uint32_t image = 0;
    std::uint16_t patch_id = 0;
    NormRect region;
    friend bool operator==(const PatchRow&, const PatchRow&) = default;
};

struct BestPatch {
    std::uint16_t patch_id = 0;
    NormRect region;
    float score = 0.0F;
};

/// Image table plus the searchable patches of a record list, in record order
/// then patch id order. Ground-truth crop entries are left out.
struct PatchTable {
    std::vector<ImageInfo> images;
    std::vector<PatchRow> rows;
    std::vector<const Descriptor*> descriptors;
    std::size_t dim = 0;
};

/// Validates records for indexing: non-empty, unique image ids, one dimension.
PatchTable collect_patches(std::span<const ImageRecord> records);

/// Exact max-patch similarity index.
class FlatIndex {
public:
    FlatIndex() = default;

    static FlatIndex build(std::span<const ImageRecord> records);

    /// Reassembles an index from stored parts; every row must be unit length.
    static FlatIndex from_parts(std::size_t dim, std::vector<ImageInfo> images, std::vector<PatchRow> rows,
                                std::vector<float> matrix);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t row_count() const noexcept { return rows_.size(); }
    std::span<const ImageInfo> images() const noexcept { return images_; }
    std::span<const PatchRow> rows() const noexcept { return rows_; }
    std::span<const float> matrix() const noexcept { return matrix_; }
    std::span<const float> row(std::size_t i) const noexcept { return {&matrix_[i * dim_], dim_}; }

    RankedList search(const Descriptor& query, std::size_t k, std::string query_id = {}) const;

    BestPatch best_patch(std::string_view image_id, const Descriptor& query) const;

private:
    void check_query(const Descriptor& query) const;

    std::size_t dim_ = 0;
    std::vector<ImageInfo> images_;
    std::vector<PatchRow> rows_;
    std::vector<float> matrix_;
};

}  // namespace patchwise
