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

#include "patchwise/flat_index.h"
#include "patchwise/pq.h"

namespace patchwise {

struct InvertedList {
    std::vector<PatchRow> rows;
    /// Row-major rows.size() x m.
    std::vector<std::uint8_t> codes;
    friend bool operator==(const InvertedList&, const InvertedList&) = default;
};

struct CompressionStats {
    std::uint64_t vectors = 0;
    std::uint64_t raw_bytes = 0;
    std::uint64_t code_bytes = 0;
    std::uint64_t coarse_id_bytes = 0;
    std::uint64_t codebook_bytes = 0;
    std::uint64_t coarse_table_bytes = 0;
    std::uint64_t compressed_bytes = 0;
    double compression_ratio = 0.0;
};

/// Bytes needed to store one coarse list id: 1, 2 or 4.
std::size_t coarse_id_width(std::size_t nlist);

/// raw = count * d * 4; compressed = count * (m + coarse id bytes) plus the
/// sub-centroid tables and the coarse centroid table.
CompressionStats compression_stats(std::size_t count, std::size_t dim, std::size_t m, std::size_t nlist);

/// Raw storage on both sides, ratio 1.
CompressionStats uncompressed_stats(std::size_t count, std::size_t dim);

/// Inverted file over product-quantized patch descriptors.
class IvfPqIndex {
public:
    IvfPqIndex() = default;

    static IvfPqIndex build(std::span<const ImageRecord> records, Codebook codebook);

    static IvfPqIndex from_parts(Codebook codebook, std::vector<ImageInfo> images,
                                 std::vector<InvertedList> lists);

    std::size_t dim() const noexcept { return codebook_.dim; }
    const Codebook& codebook() const noexcept { return codebook_; }
    std::span<const ImageInfo> images() const noexcept { return images_; }
    std::span<const InvertedList> lists() const noexcept { return lists_; }
    std::size_t entry_count() const noexcept;

    /// Probes the nprobe lists whose centroids score highest against the query
    /// (clamped to nlist), scores their entries by ADC and keeps the best
    /// patch per image.
    RankedList search(const Descriptor& query, std::size_t k, std::size_t nprobe, std::string query_id = {}) const;

    /// Lists probed for a query, best first.
    std::vector<std::uint32_t> probe_order(const Descriptor& query, std::size_t nprobe) const;

    CompressionStats stats() const;

private:
    Codebook codebook_;
    std::vector<ImageInfo> images_;
    std::vector<InvertedList> lists_;
};

}  // namespace patchwise
