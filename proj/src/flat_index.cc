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

#include "patchwise/flat_index.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "patchwise/error.h"

namespace patchwise {

PatchTable collect_patches(std::span<const ImageRecord> records) {
    if (records.empty()) {
        throw Error(ErrorCode::kBuildError, "cannot build an index from zero images");
    }
    if (records.size() > UINT32_MAX) {
        throw Error(ErrorCode::kBuildError, "too many images");
    }
    PatchTable table;
    std::set<std::string_view> ids;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ImageRecord& rec = records[i];
        if (!ids.insert(rec.image_id).second) {
            throw Error(ErrorCode::kBuildError, "duplicate image id '" + rec.image_id + "'");
        }
        table.images.push_back({rec.image_id, rec.width, rec.height});
        std::vector<const PatchEntry*> entries;
        for (const PatchEntry& e : rec.entries) {
            if (e.patch_id != kGtCropPatchId) entries.push_back(&e);
        }
        std::sort(entries.begin(), entries.end(),
                  [](const PatchEntry* a, const PatchEntry* b) { return a->patch_id < b->patch_id; });
        for (std::size_t j = 1; j < entries.size(); ++j) {
            if (entries[j]->patch_id == entries[j - 1]->patch_id) {
                throw Error(ErrorCode::kBuildError, "image '" + rec.image_id + "' repeats patch id " +
                                                        std::to_string(entries[j]->patch_id));
            }
        }
        for (const PatchEntry* e : entries) {
            if (table.dim == 0) {
                table.dim = e->descriptor.dim();
            }
            if (e->descriptor.dim() != table.dim || table.dim == 0) {
                throw Error(ErrorCode::kBuildError,
                            "image '" + rec.image_id + "' has descriptor dimension " +
                                std::to_string(e->descriptor.dim()) + ", expected " + std::to_string(table.dim));
            }
            table.rows.push_back({static_cast<std::uint32_t>(i), e->patch_id, e->region});
            table.descriptors.push_back(&e->descriptor);
        }
    }
    if (table.rows.empty()) {
        throw Error(ErrorCode::kBuildError, "records contain no searchable patches");
    }
    return table;
}

FlatIndex FlatIndex::build(std::span<const ImageRecord> records) {
    PatchTable table = collect_patches(records);
    std::vector<float> matrix;
    matrix.reserve(table.rows.size() * table.dim);
    for (const Descriptor* d : table.descriptors) {
        matrix.insert(matrix.end(), d->values().begin(), d->values().end());
    }
    FlatIndex index;
    index.dim_ = table.dim;
    index.images_ = std::move(table.images);
    index.rows_ = std::move(table.rows);
    index.matrix_ = std::move(matrix);
    return index;
}

FlatIndex FlatIndex::from_parts(std::size_t dim, std::vector<ImageInfo> images, std::vector<PatchRow> rows,
                                std::vector<float> matrix) {
    if (dim == 0 || matrix.size() != rows.size() * dim) {
        throw Error(ErrorCode::kBuildError, "descriptor matrix does not match the row table");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].image >= images.size()) {
            throw Error(ErrorCode::kBuildError, "row refers to a missing image");
        }
        if (!rows[i].region.valid()) {
            throw Error(ErrorCode::kBuildError, "row has an invalid region");
        }
        const std::span<const float> v(&matrix[i * dim], dim);
        const double norm = std::sqrt(dot(v, v));
        if (!(std::abs(norm - 1.0) <= 1e-5)) {
            throw Error(ErrorCode::kBuildError, "row " + std::to_string(i) + " is not unit length");
        }
    }
    FlatIndex index;
    index.dim_ = dim;
    index.images_ = std::move(images);
    index.rows_ = std::move(rows);
    index.matrix_ = std::move(matrix);
    return index;
}

void FlatIndex::check_query(const Descriptor& query) const {
    if (query.dim() != dim_) {
        throw Error(ErrorCode::kDimensionMismatch, "query dimension " + std::to_string(query.dim()) +
                                                       " does not match index dimension " + std::to_string(dim_));
    }
}

RankedList FlatIndex::search(const Descriptor& query, std::size_t k, std::string query_id) const {
    check_query(query);
    std::vector<ImageBest> best(images_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto score = static_cast<float>(dot(query.values(), row(i)));
        best[rows_[i].image].offer(score, rows_[i].patch_id, rows_[i].region);
    }
    return rank_images(images_, best, k, std::move(query_id));
}

BestPatch FlatIndex::best_patch(std::string_view image_id, const Descriptor& query) const {
    check_query(query);
    const auto it = std::find_if(images_.begin(), images_.end(),
                                 [&](const ImageInfo& info) { return info.image_id == image_id; });
    if (it == images_.end()) {
        throw Error(ErrorCode::kNotFound, "image '" + std::string(image_id) + "' is not in the index");
    }
    const auto ordinal = static_cast<std::uint32_t>(it - images_.begin());
    ImageBest best;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].image != ordinal) continue;
        best.offer(static_cast<float>(dot(query.values(), row(i))), rows_[i].patch_id, rows_[i].region);
    }
    if (!best.seen) {
        throw Error(ErrorCode::kNotFound, "image '" + std::string(image_id) + "' has no patches");
    }
    return {best.patch_id, best.region, best.score};
}

}  // namespace patchwise
