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

#include "patchwise/ranking.h"

#include <algorithm>
#include <numeric>

#include "patchwise/error.h"

namespace patchwise {

RankedList rank_images(std::span<const ImageInfo> images, std::span<const ImageBest> best, std::size_t k,
                       std::string query_id) {
    if (images.size() != best.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "score table does not match the image table");
    }
    if (k < 1) {
        throw Error(ErrorCode::kInvalidParameter, "k must be at least 1");
    }
    std::vector<std::size_t> order;
    order.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (best[i].seen) order.push_back(i);
    }
    const auto before = [&](std::size_t a, std::size_t b) {
        if (best[a].score != best[b].score) return best[a].score > best[b].score;
        return images[a].image_id < images[b].image_id;
    };
    const std::size_t keep = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), before);

    RankedList out;
    out.query_id = std::move(query_id);
    out.hits.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r) {
        const std::size_t i = order[r];
        out.hits.push_back({images[i].image_id, best[i].score, best[i].patch_id, best[i].region,
                            static_cast<std::uint32_t>(r + 1)});
    }
    return out;
}

}  // namespace patchwise
