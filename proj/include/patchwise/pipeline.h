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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchwise/embed.h"
#include "patchwise/embedding_io.h"
#include "patchwise/eval.h"
#include "patchwise/index_io.h"
#include "patchwise/pq.h"
#include "patchwise/rng.h"

namespace patchwise {

struct PipelineConfig {
    PatchLevel level = PatchLevel::kL3;
    PatchStrategy strategy = PatchStrategy::kGrid;
    double stride = 0.5;
    std::size_t max_regions = kDefaultMaxRegions;
    int dim = 64;
    std::uint64_t seed = 0;
    SynthConfig synth;
    bool gt_crops = false;
    IndexKind kind = IndexKind::kFlat;
    PQParams pq;
    PoolStrategy pool;
    LocScoreConfig eval;
    std::size_t top_k = 100;

    /// Throws on inconsistent settings, e.g. d not divisible by m for an
    /// IVFPQ build.
    void validate() const;
};

/// Patch layout for one image under the configured strategy. The external
/// strategy draws max_regions random boxes from rng.
PatchSet make_patch_set(const PipelineConfig& config, int width, int height, Rng& rng);

ImageRecord embed_image(const ToyEmbedder& embedder, const SynthImage& image, const PatchSet& patches);

struct SynthCorpus {
    std::vector<ImageRecord> database;
    std::vector<ImageRecord> queries;
    std::vector<GroundTruthQuery> ground_truth;
};

/// Synthetic images embedded patch by patch with the toy embedder.
SynthCorpus make_synth_corpus(const PipelineConfig& config);

/// Writes database.pwr, queries.pwr and ground_truth.jsonl into dir.
SynthCorpus run_synth(const PipelineConfig& config, const std::filesystem::path& dir);

struct BuildSummary {
    IndexKind kind = IndexKind::kFlat;
    std::size_t images = 0;
    std::size_t rows = 0;
    std::size_t pool_size = 0;
    std::vector<std::string> warnings;
};

/// Flat index, or an IVFPQ index whose codebook is trained on the configured
/// pool (the ground-truth pool needs gt).
Index build_index(std::span<const ImageRecord> records, const PipelineConfig& config,
                  std::span<const GroundTruthQuery> gt = {}, BuildSummary* summary = nullptr);

/// Descriptor a query record contributes: its patch 0 entry.
const Descriptor& query_descriptor(const ImageRecord& query);

/// One ranking per query record. nprobe only applies to IVFPQ indexes.
std::vector<RankedList> search_index(const Index& index, std::span<const ImageRecord> queries, std::size_t k,
                                     std::size_t nprobe);

std::size_t index_dim(const Index& index);

/// CR 1 for flat indexes.
CompressionStats index_stats(const Index& index);

std::string format_results(std::span<const RankedList> results);
std::vector<RankedList> parse_results(std::string_view text);

std::string stats_to_json(const CompressionStats& stats, IndexKind kind);
std::string_view index_kind_name(IndexKind kind) noexcept;
IndexKind parse_index_kind(std::string_view text);

}  // namespace patchwise
