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

#include "patchwise/ivfpq_index.h"

#include <algorithm>
#include <numeric>

#include "patchwise/error.h"

namespace patchwise {

std::size_t coarse_id_width(std::size_t nlist) {
    if (nlist <= 0x100) return 1;
    if (nlist <= 0x10000) return 2;
    return 4;
}

CompressionStats compression_stats(std::size_t count, std::size_t dim, std::size_t m, std::size_t nlist) {
    CompressionStats s;
    s.vectors = count;
    s.raw_bytes = static_cast<std::uint64_t>(count) * dim * sizeof(float);
    s.code_bytes = static_cast<std::uint64_t>(count) * m;
    s.coarse_id_bytes = static_cast<std::uint64_t>(count) * coarse_id_width(nlist);
    s.codebook_bytes = static_cast<std::uint64_t>(kSubCentroids) * dim * sizeof(float);
    s.coarse_table_bytes = static_cast<std::uint64_t>(nlist) * dim * sizeof(float);
    s.compressed_bytes = s.code_bytes + s.coarse_id_bytes + s.codebook_bytes + s.coarse_table_bytes;
    s.compression_ratio = static_cast<double>(s.raw_bytes) / static_cast<double>(s.compressed_bytes);
    return s;
}

CompressionStats uncompressed_stats(std::size_t count, std::size_t dim) {
    CompressionStats s;
    s.vectors = count;
    s.raw_bytes = static_cast<std::uint64_t>(count) * dim * sizeof(float);
    s.compressed_bytes = s.raw_bytes;
    s.compression_ratio = 1.0;
    return s;
}

IvfPqIndex IvfPqIndex::build(std::span<const ImageRecord> records, Codebook codebook) {
    codebook.check();
    PatchTable table = collect_patches(records);
    if (table.dim != codebook.dim) {
        throw Error(ErrorCode::kDimensionMismatch, "descriptor dimension " + std::to_string(table.dim) +
                                                       " does not match codebook dimension " +
                                                       std::to_string(codebook.dim));
    }
    IvfPqIndex index;
    index.lists_.resize(codebook.nlist);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const PQCode code = encode(codebook, table.descriptors[i]->values());
        InvertedList& list = index.lists_[code.list];
        list.rows.push_back(table.rows[i]);
        list.codes.insert(list.codes.end(), code.codes.begin(), code.codes.end());
    }
    index.codebook_ = std::move(codebook);
    index.images_ = std::move(table.images);
    return index;
}

IvfPqIndex IvfPqIndex::from_parts(Codebook codebook, std::vector<ImageInfo> images,
                                  std::vector<InvertedList> lists) {
    codebook.check();
    if (lists.size() != codebook.nlist) {
        throw Error(ErrorCode::kBuildError, "list count does not match nlist");
    }
    for (const InvertedList& list : lists) {
        if (list.codes.size() != list.rows.size() * codebook.m) {
            throw Error(ErrorCode::kBuildError, "inverted list codes do not match its rows");
        }
        for (const PatchRow& row : list.rows) {
            if (row.image >= images.size()) {
                throw Error(ErrorCode::kBuildError, "list entry refers to a missing image");
            }
            if (!row.region.valid()) {
                throw Error(ErrorCode::kBuildError, "list entry has an invalid region");
            }
        }
    }
    IvfPqIndex index;
    index.codebook_ = std::move(codebook);
    index.images_ = std::move(images);
    index.lists_ = std::move(lists);
    return index;
}

std::size_t IvfPqIndex::entry_count() const noexcept {
    std::size_t n = 0;
    for (const InvertedList& list : lists_) n += list.rows.size();
    return n;
}

std::vector<std::uint32_t> IvfPqIndex::probe_order(const Descriptor& query, std::size_t nprobe) const {
    if (query.dim() != codebook_.dim) {
        throw Error(ErrorCode::kDimensionMismatch, "query dimension " + std::to_string(query.dim()) +
                                                       " does not match index dimension " +
                                                       std::to_string(codebook_.dim));
    }
    if (nprobe < 1) {
        throw Error(ErrorCode::kInvalidParameter, "nprobe must be at least 1");
    }
    const std::size_t nlist = codebook_.nlist;
    std::vector<double> score(nlist);
    for (std::size_t c = 0; c < nlist; ++c) score[c] = dot(codebook_.coarse_centroid(c), query.values());
    std::vector<std::uint32_t> order(nlist);
    std::iota(order.begin(), order.end(), 0U);
    const std::size_t keep = std::min(nprobe, nlist);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (score[a] != score[b]) return score[a] > score[b];
                          return a < b;
                      });
    order.resize(keep);
    return order;
}

RankedList IvfPqIndex::search(const Descriptor& query, std::size_t k, std::size_t nprobe,
                              std::string query_id) const {
    const std::vector<std::uint32_t> probes = probe_order(query, nprobe);
    const std::vector<double> tables = adc_tables(codebook_, query.values());
    const std::size_t m = codebook_.m;
    std::vector<ImageBest> best(images_.size());
    for (std::uint32_t id : probes) {
        const InvertedList& list = lists_[id];
        for (std::size_t i = 0; i < list.rows.size(); ++i) {
            const auto score = static_cast<float>(adc_score(tables, {&list.codes[i * m], m}));
            best[list.rows[i].image].offer(score, list.rows[i].patch_id, list.rows[i].region);
        }
    }
    return rank_images(images_, best, k, std::move(query_id));
}

CompressionStats IvfPqIndex::stats() const {
    return compression_stats(entry_count(), codebook_.dim, codebook_.m, codebook_.nlist);
}

}  // namespace patchwise
