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

#include "patchwise/pipeline.h"

#include <json.hpp>

#include <algorithm>
#include <map>

#include "patchwise/error.h"

namespace patchwise {

void PipelineConfig::validate() const {
    if (dim < 1 || dim > 65535) {
        throw Error(ErrorCode::kInvalidParameter, "descriptor dimension must lie in [1, 65535]");
    }
    if (strategy == PatchStrategy::kSliding) {
        if (!(stride > 0.0) || stride > 1.0) {
            throw Error(ErrorCode::kInvalidParameter, "stride must lie in (0, 1]");
        }
        if (level == PatchLevel::kL0) {
            throw Error(ErrorCode::kInvalidParameter, "sliding windows need level l1 or above");
        }
    }
    if (max_regions < 1) {
        throw Error(ErrorCode::kInvalidParameter, "max_regions must be at least 1");
    }
    if (kind == IndexKind::kIvfPq) pq.validate(static_cast<std::size_t>(dim));
    if (top_k < 1) {
        throw Error(ErrorCode::kInvalidParameter, "k must be at least 1");
    }
    eval.validate();
}

PatchSet make_patch_set(const PipelineConfig& config, int width, int height, Rng& rng) {
    switch (config.strategy) {
        case PatchStrategy::kGrid: return grid_patches(config.level);
        case PatchStrategy::kSliding: return sliding_windows(config.level, config.stride);
        case PatchStrategy::kExternal: {
            std::vector<PixelBox> boxes;
            for (std::size_t i = 0; i < config.max_regions; ++i) {
                const int w = static_cast<int>(rng.uniform_int(std::max(1, width / 8), std::max(1, width / 2)));
                const int h = static_cast<int>(rng.uniform_int(std::max(1, height / 8), std::max(1, height / 2)));
                const int x = static_cast<int>(rng.uniform_int(0, width - w));
                const int y = static_cast<int>(rng.uniform_int(0, height - h));
                boxes.push_back({x, y, w, h});
            }
            return external_regions(boxes, width, height, config.max_regions);
        }
    }
    throw Error(ErrorCode::kInvalidParameter, "unknown patch strategy");
}

ImageRecord embed_image(const ToyEmbedder& embedder, const SynthImage& image, const PatchSet& patches) {
    ImageRecord rec;
    rec.image_id = image.image_id;
    rec.width = static_cast<std::uint32_t>(image.width);
    rec.height = static_cast<std::uint32_t>(image.height);
    rec.entries.reserve(patches.size());
    for (const Patch& p : patches.patches) {
        rec.entries.push_back({p.id, p.region, embedder.embed(image, p.region)});
    }
    return rec;
}

SynthCorpus make_synth_corpus(const PipelineConfig& config) {
    config.validate();
    const SynthDataset data = synth_dataset(config.synth);
    const ToyEmbedder embedder(config.dim, config.seed);
    Rng box_rng(config.seed ^ 0xB0C5B0C5B0C5B0C5ULL);

    SynthCorpus corpus;
    corpus.database.reserve(data.images.size());
    for (const SynthImage& img : data.images) {
        ImageRecord rec = embed_image(embedder, img, make_patch_set(config, img.width, img.height, box_rng));
        if (config.gt_crops && img.planted_box) {
            rec.entries.push_back({kGtCropPatchId, to_norm(*img.planted_box, img.width, img.height),
                                   embedder.embed_box(img, *img.planted_box)});
        }
        corpus.database.push_back(std::move(rec));
    }

    ImageRecord query;
    query.image_id = data.query.image_id;
    query.width = static_cast<std::uint32_t>(data.query.width);
    query.height = static_cast<std::uint32_t>(data.query.height);
    query.entries.push_back({0, kFullImage, embedder.embed(data.query, kFullImage)});
    corpus.queries.push_back(std::move(query));

    GroundTruthQuery gt;
    gt.query_id = "q0";
    gt.descriptor_ref = data.query.image_id;
    for (const SynthPositive& p : data.positives) gt.positives.push_back({p.image_id, p.box, p.width, p.height});
    if (!gt.positives.empty()) corpus.ground_truth.push_back(std::move(gt));
    return corpus;
}

SynthCorpus run_synth(const PipelineConfig& config, const std::filesystem::path& dir) {
    SynthCorpus corpus = make_synth_corpus(config);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::kIoError, "cannot create directory '" + dir.string() + "': " + ec.message());
    }
    write_embeddings(corpus.database, dir / "database.pwr");
    write_embeddings(corpus.queries, dir / "queries.pwr");
    write_ground_truth(corpus.ground_truth, dir / "ground_truth.jsonl");
    return corpus;
}

Index build_index(std::span<const ImageRecord> records, const PipelineConfig& config,
                  std::span<const GroundTruthQuery> gt, BuildSummary* summary) {
    BuildSummary local;
    BuildSummary& out = summary != nullptr ? *summary : local;
    out.kind = config.kind;
    if (config.kind == IndexKind::kFlat) {
        FlatIndex flat = FlatIndex::build(records);
        out.images = flat.images().size();
        out.rows = flat.row_count();
        return flat;
    }
    std::vector<GroundTruthPositive> boxes;
    for (const GroundTruthQuery& q : gt) boxes.insert(boxes.end(), q.positives.begin(), q.positives.end());
    if (config.pool.kind == PoolStrategy::Kind::kGroundTruth && boxes.empty()) {
        throw Error(ErrorCode::kInvalidParameter, "the gt training pool needs ground truth boxes");
    }
    const std::vector<Descriptor> pool = select_training_pool(records, config.pool, boxes);
    out.pool_size = pool.size();
    Codebook cb = train_codebook(pool, config.pq, config.seed, pool_strategy_name(config.pool), &out.warnings);
    IvfPqIndex index = IvfPqIndex::build(records, std::move(cb));
    out.images = index.images().size();
    out.rows = index.entry_count();
    if (config.pq.nprobe > index.codebook().nlist) {
        out.warnings.push_back("nprobe " + std::to_string(config.pq.nprobe) + " exceeds nlist " +
                               std::to_string(index.codebook().nlist) + "; searches probe every list");
    }
    return index;
}

const Descriptor& query_descriptor(const ImageRecord& query) {
    for (const PatchEntry& e : query.entries) {
        if (e.patch_id == 0) return e.descriptor;
    }
    throw Error(ErrorCode::kInvalidParameter, "query '" + query.image_id + "' has no patch 0 descriptor");
}

std::vector<RankedList> search_index(const Index& index, std::span<const ImageRecord> queries, std::size_t k,
                                     std::size_t nprobe) {
    std::vector<RankedList> out;
    out.reserve(queries.size());
    for (const ImageRecord& q : queries) {
        const Descriptor& d = query_descriptor(q);
        if (const auto* flat = std::get_if<FlatIndex>(&index)) {
            out.push_back(flat->search(d, k, q.image_id));
        } else {
            out.push_back(std::get<IvfPqIndex>(index).search(d, k, nprobe, q.image_id));
        }
    }
    return out;
}

std::size_t index_dim(const Index& index) {
    return std::visit([](const auto& idx) { return idx.dim(); }, index);
}

CompressionStats index_stats(const Index& index) {
    if (const auto* flat = std::get_if<FlatIndex>(&index)) {
        return uncompressed_stats(flat->row_count(), flat->dim());
    }
    return std::get<IvfPqIndex>(index).stats();
}

std::string format_results(std::span<const RankedList> results) {
    std::string out;
    for (const RankedList& r : results) {
        nlohmann::ordered_json line;
        line["query_id"] = r.query_id;
        line["hits"] = nlohmann::ordered_json::array();
        for (const RankedHit& h : r.hits) {
            line["hits"].push_back({{"image_id", h.image_id},
                                    {"score", h.score},
                                    {"rank", h.rank},
                                    {"best_patch_id", h.best_patch_id},
                                    {"best_region",
                                     {h.best_region.x0, h.best_region.y0, h.best_region.x1, h.best_region.y1}}});
        }
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<RankedList> parse_results(std::string_view text) {
    std::vector<RankedList> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            try {
                const nlohmann::json j = nlohmann::json::parse(line);
                RankedList r;
                r.query_id = j.at("query_id").get<std::string>();
                for (const auto& h : j.at("hits")) {
                    RankedHit hit;
                    hit.image_id = h.at("image_id").get<std::string>();
                    hit.score = h.at("score").get<float>();
                    hit.rank = h.at("rank").get<std::uint32_t>();
                    hit.best_patch_id = h.at("best_patch_id").get<std::uint16_t>();
                    const auto& b = h.at("best_region");
                    if (!b.is_array() || b.size() != 4) {
                        throw Error(ErrorCode::kParseError, "best_region must hold four numbers", start);
                    }
                    hit.best_region = {b[0].get<float>(), b[1].get<float>(), b[2].get<float>(), b[3].get<float>()};
                    if (!hit.best_region.valid()) {
                        throw Error(ErrorCode::kParseError, "best_region is not a valid region", start);
                    }
                    r.hits.push_back(std::move(hit));
                }
                out.push_back(std::move(r));
            } catch (const nlohmann::json::parse_error& err) {
                throw Error(ErrorCode::kParseError, std::string("malformed result line: ") + err.what(),
                            start + (err.byte > 0 ? err.byte - 1 : 0));
            } catch (const nlohmann::json::exception& err) {
                throw Error(ErrorCode::kParseError, std::string("malformed result line: ") + err.what(), start);
            }
        }
        start = end + 1;
    }
    return out;
}

std::string_view index_kind_name(IndexKind kind) noexcept {
    return kind == IndexKind::kFlat ? "flat" : "ivfpq";
}

IndexKind parse_index_kind(std::string_view text) {
    if (text == "flat") return IndexKind::kFlat;
    if (text == "ivfpq") return IndexKind::kIvfPq;
    throw Error(ErrorCode::kInvalidParameter, "unknown index kind '" + std::string(text) + "'");
}

std::string stats_to_json(const CompressionStats& stats, IndexKind kind) {
    nlohmann::ordered_json j;
    j["kind"] = index_kind_name(kind);
    j["vectors"] = stats.vectors;
    j["raw_bytes"] = stats.raw_bytes;
    j["code_bytes"] = stats.code_bytes;
    j["coarse_id_bytes"] = stats.coarse_id_bytes;
    j["codebook_bytes"] = stats.codebook_bytes;
    j["coarse_table_bytes"] = stats.coarse_table_bytes;
    j["compressed_bytes"] = stats.compressed_bytes;
    j["compression_ratio"] = stats.compression_ratio;
    return j.dump(2);
}

}  // namespace patchwise
