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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "patchwise/descriptor.h"
#include "patchwise/embedding_io.h"
#include "patchwise/geometry.h"
#include "patchwise/ranking.h"
#include "patchwise/rng.h"

namespace testing {

inline std::vector<float> random_raw(patchwise::Rng& rng, std::size_t dim) {
    std::vector<float> v(dim);
    for (float& x : v) x = static_cast<float>(rng.normal());
    return v;
}

inline patchwise::Descriptor random_unit(patchwise::Rng& rng, std::size_t dim) {
    return patchwise::Descriptor::normalize(random_raw(rng, dim));
}

template <typename T>
void shuffle(patchwise::Rng& rng, std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
}

inline std::string image_name(std::size_t i) {
    return "im" + std::to_string(1000 + i);
}

/// n images with grid patches of the given level and random descriptors.
inline std::vector<patchwise::ImageRecord> random_records(patchwise::Rng& rng, std::size_t n, std::size_t dim,
                                                          patchwise::PatchLevel level = patchwise::PatchLevel::kL3) {
    const patchwise::PatchSet grid = patchwise::grid_patches(level);
    std::vector<patchwise::ImageRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        patchwise::ImageRecord rec;
        rec.image_id = image_name(i);
        rec.width = 64 + static_cast<std::uint32_t>(rng.uniform_int(0, 200));
        rec.height = 64 + static_cast<std::uint32_t>(rng.uniform_int(0, 200));
        for (const auto& p : grid.patches) rec.entries.push_back({p.id, p.region, random_unit(rng, dim)});
        out.push_back(std::move(rec));
    }
    return out;
}

struct OracleHit {
    std::string image_id;
    float score;
    std::uint16_t patch_id;
    patchwise::NormRect region;
};

/// Brute force: every dot product in plain double arithmetic, grouped by image
/// through a map, then a full sort.
inline std::vector<OracleHit> brute_force(const std::vector<patchwise::ImageRecord>& records,
                                          const patchwise::Descriptor& query, std::size_t k) {
    std::map<std::string, OracleHit> best;
    for (const auto& rec : records) {
        for (const auto& e : rec.entries) {
            if (e.patch_id == patchwise::kGtCropPatchId) continue;
            double acc = 0.0;
            const auto a = query.values();
            const auto b = e.descriptor.values();
            for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
            const auto s = static_cast<float>(acc);
            auto it = best.find(rec.image_id);
            if (it == best.end()) {
                best.emplace(rec.image_id, OracleHit{rec.image_id, s, e.patch_id, e.region});
            } else if (s > it->second.score || (s == it->second.score && e.patch_id < it->second.patch_id)) {
                it->second = {rec.image_id, s, e.patch_id, e.region};
            }
        }
    }
    std::vector<OracleHit> hits;
    for (auto& [id, h] : best) hits.push_back(h);
    std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.image_id < b.image_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

inline bool matches_oracle(const patchwise::RankedList& list, const std::vector<OracleHit>& oracle) {
    if (list.hits.size() != oracle.size()) return false;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        const auto& h = list.hits[i];
        if (h.image_id != oracle[i].image_id || h.score != oracle[i].score || h.best_patch_id != oracle[i].patch_id ||
            !(h.best_region == oracle[i].region) || h.rank != i + 1) {
            return false;
        }
    }
    return true;
}

}  // namespace testing
