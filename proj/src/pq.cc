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

#include "patchwise/pq.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "patchwise/error.h"
#include "patchwise/kmeans.h"

namespace patchwise {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::size_t parse_size(std::string_view field, const char* name) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::kInvalidParameter, std::string("cannot parse ") + name + " from '" +
                                                      std::string(field) + "'");
    }
    return value;
}

}  // namespace

void PQParams::validate(std::size_t dim) const {
    if (nbits != kPqBits) {
        throw Error(ErrorCode::kInvalidParameter, "only nbits = 8 is supported");
    }
    if (m < 1 || dim % m != 0) {
        throw Error(ErrorCode::kInvalidParameter, "descriptor dimension " + std::to_string(dim) +
                                                      " is not divisible by m = " + std::to_string(m));
    }
    if (nlist < 1) {
        throw Error(ErrorCode::kInvalidParameter, "nlist must be at least 1");
    }
    if (nlist > UINT32_MAX) {
        throw Error(ErrorCode::kInvalidParameter, "nlist is too large");
    }
    if (nprobe < 1) {
        throw Error(ErrorCode::kInvalidParameter, "nprobe must be at least 1");
    }
}

PQParams parse_pq_params(std::string_view text) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = text.find(',', start);
        fields.push_back(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (fields.size() != 3) {
        throw Error(ErrorCode::kInvalidParameter, "expected m,nlist,nbits but got '" + std::string(text) + "'");
    }
    PQParams p;
    p.m = parse_size(fields[0], "m");
    p.nlist = parse_size(fields[1], "nlist");
    p.nbits = static_cast<int>(std::min<std::size_t>(parse_size(fields[2], "nbits"), 64));
    if (p.m == 0 || p.nlist == 0) {
        throw Error(ErrorCode::kInvalidParameter, "m and nlist must be at least 1");
    }
    if (p.nbits != kPqBits) {
        throw Error(ErrorCode::kInvalidParameter, "only nbits = 8 is supported");
    }
    return p;
}

void Codebook::check() const {
    if (dim == 0 || m == 0 || dim % m != 0 || nlist == 0 || coarse.size() != nlist * dim ||
        sub.size() != kSubCentroids * dim) {
        throw Error(ErrorCode::kInvalidParameter, "codebook tables are inconsistent with its shape");
    }
}

Codebook train_codebook(std::span<const Descriptor> pool, const PQParams& params, std::uint64_t seed,
                        std::string pool_tag, std::vector<std::string>* warnings) {
    if (pool.empty()) {
        throw Error(ErrorCode::kInvalidParameter, "PQ training pool is empty");
    }
    const std::size_t dim = pool.front().dim();
    params.validate(dim);
    std::vector<float> points;
    points.reserve(pool.size() * dim);
    for (const Descriptor& d : pool) {
        if (d.dim() != dim) {
            throw Error(ErrorCode::kDimensionMismatch, "training pool mixes descriptor dimensions");
        }
        points.insert(points.end(), d.values().begin(), d.values().end());
    }
    const auto warn = [&](std::string msg) {
        if (warnings != nullptr) warnings->push_back(std::move(msg));
    };

    Codebook cb;
    cb.dim = dim;
    cb.m = params.m;
    cb.seed = seed;
    cb.pool_tag = std::move(pool_tag);
    cb.nlist = params.nlist;
    if (cb.nlist > pool.size()) {
        warn("nlist " + std::to_string(params.nlist) + " clamped to the pool size " + std::to_string(pool.size()));
        cb.nlist = pool.size();
    }

    KMeansResult coarse = kmeans(points, dim, {cb.nlist, derive_seed(seed, 0)});
    for (auto& w : coarse.warnings) warn("coarse quantizer: " + w);
    cb.coarse = std::move(coarse.centroids);
    for (std::size_t c = 0; c < cb.nlist; ++c) {
        std::span<float> row(&cb.coarse[c * dim], dim);
        const double norm = std::sqrt(dot(row, row));
        if (norm > 0.0) {
            for (float& v : row) v = static_cast<float>(v / norm);
        }
    }

    const std::size_t dsub = cb.dsub();
    cb.sub.resize(kSubCentroids * dim);
    std::vector<float> slices(pool.size() * dsub);
    std::size_t short_subs = 0;
    std::size_t fewest = pool.size();
    for (std::size_t j = 0; j < cb.m; ++j) {
        for (std::size_t i = 0; i < pool.size(); ++i) {
            std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(i * dim + j * dsub), dsub,
                        slices.begin() + static_cast<std::ptrdiff_t>(i * dsub));
        }
        KMeansResult sub = kmeans(slices, dsub, {kSubCentroids, derive_seed(seed, j + 1)});
        if (!sub.warnings.empty()) {
            ++short_subs;
            fewest = std::min(fewest, count_distinct(slices, dsub));
        }
        std::copy(sub.centroids.begin(), sub.centroids.end(),
                  cb.sub.begin() + static_cast<std::ptrdiff_t>(j * kSubCentroids * dsub));
    }
    if (short_subs > 0) {
        warn(std::to_string(short_subs) + " of " + std::to_string(cb.m) + " subquantizers have fewer than 256 " +
             "distinct training slices (as few as " + std::to_string(fewest) + "); duplicate centroids produced");
    }
    return cb;
}

std::uint32_t coarse_assign(const Codebook& cb, std::span<const float> v) {
    std::uint32_t best = 0;
    double best_s = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cb.nlist; ++c) {
        const double s = dot(cb.coarse_centroid(c), v);
        if (s > best_s) {
            best_s = s;
            best = static_cast<std::uint32_t>(c);
        }
    }
    return best;
}

PQCode encode(const Codebook& cb, std::span<const float> v) {
    if (v.size() != cb.dim) {
        throw Error(ErrorCode::kDimensionMismatch, "vector dimension does not match the codebook");
    }
    PQCode code;
    code.list = coarse_assign(cb, v);
    code.codes.resize(cb.m);
    const std::size_t dsub = cb.dsub();
    for (std::size_t j = 0; j < cb.m; ++j) {
        const std::span<const float> table(&cb.sub[j * kSubCentroids * dsub], kSubCentroids * dsub);
        code.codes[j] = static_cast<std::uint8_t>(nearest_centroid(table, dsub, v.subspan(j * dsub, dsub)));
    }
    return code;
}

std::vector<float> decode(const Codebook& cb, const PQCode& code) {
    if (code.codes.size() != cb.m) {
        throw Error(ErrorCode::kDimensionMismatch, "code length does not match the codebook");
    }
    std::vector<float> out;
    out.reserve(cb.dim);
    for (std::size_t j = 0; j < cb.m; ++j) {
        const auto c = cb.sub_centroid(j, code.codes[j]);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

std::vector<double> adc_tables(const Codebook& cb, std::span<const float> query) {
    if (query.size() != cb.dim) {
        throw Error(ErrorCode::kDimensionMismatch, "query dimension does not match the codebook");
    }
    const std::size_t dsub = cb.dsub();
    std::vector<double> tables(cb.m * kSubCentroids);
    for (std::size_t j = 0; j < cb.m; ++j) {
        const auto slice = query.subspan(j * dsub, dsub);
        for (std::size_t c = 0; c < kSubCentroids; ++c) {
            tables[j * kSubCentroids + c] = dot(slice, cb.sub_centroid(j, c));
        }
    }
    return tables;
}

double adc_score(std::span<const double> tables, std::span<const std::uint8_t> codes) {
    double s = 0.0;
    for (std::size_t j = 0; j < codes.size(); ++j) s += tables[j * kSubCentroids + codes[j]];
    return s;
}

PoolStrategy parse_pool_strategy(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "gt") return {PoolStrategy::Kind::kGroundTruth, PatchLevel::kL0};
    try {
        return {PoolStrategy::Kind::kLevel, parse_level(t)};
    } catch (const Error&) {
        throw Error(ErrorCode::kInvalidParameter, "unknown training pool '" + std::string(text) + "'");
    }
}

std::string pool_strategy_name(const PoolStrategy& strategy) {
    if (strategy.kind == PoolStrategy::Kind::kGroundTruth) return "gt";
    return std::string(level_name(strategy.level));
}

int region_scale(const NormRect& region) {
    const double w = static_cast<double>(region.x1) - region.x0;
    const double h = static_cast<double>(region.y1) - region.y0;
    if (!(w > 0.0)) return 0;
    const long g = std::lround(1.0 / w);
    if (g < 1 || g > 65535) return 0;
    const double side = 1.0 / static_cast<double>(g);
    if (std::abs(w - side) > 1e-4 || std::abs(h - side) > 1e-4) return 0;
    return static_cast<int>(g);
}

std::vector<Descriptor> select_training_pool(std::span<const ImageRecord> records, const PoolStrategy& strategy,
                                             std::span<const GroundTruthPositive> gt_boxes) {
    std::vector<Descriptor> pool;
    if (strategy.kind == PoolStrategy::Kind::kLevel) {
        const int max_g = max_grid_size(strategy.level);
        for (const ImageRecord& rec : records) {
            std::vector<const PatchEntry*> entries;
            for (const PatchEntry& e : rec.entries) {
                if (e.patch_id == kGtCropPatchId) continue;
                const int g = region_scale(e.region);
                if (g >= 1 && g <= max_g) entries.push_back(&e);
            }
            std::sort(entries.begin(), entries.end(),
                      [](const PatchEntry* a, const PatchEntry* b) { return a->patch_id < b->patch_id; });
            for (const PatchEntry* e : entries) pool.push_back(e->descriptor);
        }
        return pool;
    }

    std::map<std::string_view, const ImageRecord*> by_id;
    for (const ImageRecord& rec : records) by_id.emplace(rec.image_id, &rec);
    std::map<std::tuple<std::string, std::int32_t, std::int32_t, std::int32_t, std::int32_t>, bool> used;
    for (const GroundTruthPositive& gt : gt_boxes) {
        if (!used.emplace(std::make_tuple(gt.image_id, gt.bbox.x, gt.bbox.y, gt.bbox.w, gt.bbox.h), true).second) {
            continue;
        }
        const auto it = by_id.find(gt.image_id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::kNotFound, "ground-truth image '" + gt.image_id + "' has no embeddings");
        }
        const ImageRecord& rec = *it->second;
        const int w = rec.width > 0 ? static_cast<int>(rec.width) : gt.width;
        const int h = rec.height > 0 ? static_cast<int>(rec.height) : gt.height;
        if (w < 1 || h < 1) {
            throw Error(ErrorCode::kInvalidParameter, "image '" + gt.image_id + "' has no size");
        }
        const auto crop = std::find_if(rec.entries.begin(), rec.entries.end(), [&](const PatchEntry& e) {
            return e.patch_id == kGtCropPatchId && to_pixel(e.region, w, h) == gt.bbox;
        });
        if (crop != rec.entries.end()) {
            pool.push_back(crop->descriptor);
            continue;
        }
        const PatchEntry* best = nullptr;
        double best_iou = -1.0;
        for (const PatchEntry& e : rec.entries) {
            if (e.patch_id == kGtCropPatchId) continue;
            const double v = iou(to_pixel(e.region, w, h), gt.bbox);
            if (v > best_iou || (v == best_iou && best != nullptr && e.patch_id < best->patch_id)) {
                best_iou = v;
                best = &e;
            }
        }
        if (best == nullptr) {
            throw Error(ErrorCode::kNotFound, "image '" + gt.image_id + "' has no patches");
        }
        pool.push_back(best->descriptor);
    }
    if (gt_boxes.empty()) {
        throw Error(ErrorCode::kInvalidParameter, "ground-truth pool needs at least one box");
    }
    return pool;
}

}  // namespace patchwise
