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

#include "patchwise/geometry.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "patchwise/error.h"

namespace patchwise {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Boundary k/g of a grid with side g. Neighbouring cells evaluate the same
// expression, so shared edges are bit-identical.
float grid_coord(double cells, int g) {
    return static_cast<float>(cells / static_cast<double>(g));
}

void push_patch(PatchSet& set, const NormRect& region) {
    if (set.patches.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw Error(ErrorCode::kInvalidParameter, "patch set exceeds 65536 patches");
    }
    set.patches.push_back({static_cast<std::uint16_t>(set.patches.size()), region});
}

}  // namespace

bool NormRect::valid() const noexcept {
    return x0 >= 0.0F && y0 >= 0.0F && x1 <= 1.0F && y1 <= 1.0F && x0 < x1 && y0 < y1;
}

int max_grid_size(PatchLevel level) noexcept {
    return static_cast<int>(level) + 1;
}

std::size_t patch_count(PatchLevel level) noexcept {
    std::size_t total = 0;
    for (int g = 1; g <= max_grid_size(level); ++g) {
        total += static_cast<std::size_t>(g * g);
    }
    return total;
}

PatchLevel parse_level(std::string_view text) {
    const std::string t = lower(text);
    if (t == "l0") return PatchLevel::kL0;
    if (t == "l1") return PatchLevel::kL1;
    if (t == "l2") return PatchLevel::kL2;
    if (t == "l3") return PatchLevel::kL3;
    throw Error(ErrorCode::kInvalidParameter, "unknown patch level '" + std::string(text) + "'");
}

std::string_view level_name(PatchLevel level) noexcept {
    switch (level) {
        case PatchLevel::kL0: return "l0";
        case PatchLevel::kL1: return "l1";
        case PatchLevel::kL2: return "l2";
        case PatchLevel::kL3: return "l3";
    }
    return "l0";
}

PatchStrategy parse_strategy(std::string_view text) {
    const std::string t = lower(text);
    if (t == "grid") return PatchStrategy::kGrid;
    if (t == "sliding") return PatchStrategy::kSliding;
    if (t == "external") return PatchStrategy::kExternal;
    throw Error(ErrorCode::kInvalidParameter, "unknown patch strategy '" + std::string(text) + "'");
}

std::string_view strategy_name(PatchStrategy strategy) noexcept {
    switch (strategy) {
        case PatchStrategy::kGrid: return "grid";
        case PatchStrategy::kSliding: return "sliding";
        case PatchStrategy::kExternal: return "external";
    }
    return "grid";
}

PatchSet grid_patches(PatchLevel level) {
    PatchSet set;
    set.strategy = PatchStrategy::kGrid;
    set.patches.reserve(patch_count(level));
    for (int g = 1; g <= max_grid_size(level); ++g) {
        for (int row = 0; row < g; ++row) {
            for (int col = 0; col < g; ++col) {
                push_patch(set, {grid_coord(col, g), grid_coord(row, g), grid_coord(col + 1, g),
                                 grid_coord(row + 1, g)});
            }
        }
    }
    return set;
}

PatchSet sliding_windows(PatchLevel level, double stride_frac) {
    if (!(stride_frac > 0.0) || stride_frac > 1.0 || !std::isfinite(stride_frac)) {
        throw Error(ErrorCode::kInvalidParameter, "stride must lie in (0, 1]");
    }
    if (level == PatchLevel::kL0) {
        throw Error(ErrorCode::kInvalidParameter, "sliding windows need level l1 or above");
    }
    PatchSet set;
    set.strategy = PatchStrategy::kSliding;
    push_patch(set, kFullImage);
    for (int g = 2; g <= max_grid_size(level); ++g) {
        // Window starts in units of one cell; the slack absorbs representation
        // error of strides such as 0.1.
        const double steps = std::floor(static_cast<double>(g - 1) / stride_frac + 1e-9);
        if (steps > 65535.0) {
            throw Error(ErrorCode::kInvalidParameter, "stride produces too many windows");
        }
        const int positions = static_cast<int>(steps) + 1;
        std::vector<double> starts(static_cast<std::size_t>(positions));
        for (int p = 0; p < positions; ++p) {
            starts[static_cast<std::size_t>(p)] =
                (p == positions - 1) ? static_cast<double>(g - 1) : p * stride_frac;
        }
        for (double sy : starts) {
            for (double sx : starts) {
                push_patch(set, {grid_coord(sx, g), grid_coord(sy, g), grid_coord(sx + 1.0, g),
                                 grid_coord(sy + 1.0, g)});
            }
        }
    }
    return set;
}

NormRect to_norm(const PixelBox& box, int image_w, int image_h) noexcept {
    const auto clamp01 = [](double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); };
    const double w = image_w;
    const double h = image_h;
    return {clamp01(box.x / w), clamp01(box.y / h),
            clamp01((static_cast<double>(box.x) + box.w) / w),
            clamp01((static_cast<double>(box.y) + box.h) / h)};
}

PatchSet external_regions(std::span<const PixelBox> boxes, int image_w, int image_h,
                          std::size_t max_count) {
    if (image_w < 1 || image_h < 1) {
        throw Error(ErrorCode::kInvalidParameter, "image dimensions must be positive");
    }
    if (max_count < 1) {
        throw Error(ErrorCode::kInvalidParameter, "max_count must be at least 1");
    }
    PatchSet set;
    set.strategy = PatchStrategy::kExternal;
    push_patch(set, kFullImage);
    std::size_t kept = 0;
    for (const PixelBox& box : boxes) {
        if (kept == max_count) break;
        const NormRect r = to_norm(box, image_w, image_h);
        if (!r.valid()) continue;
        push_patch(set, r);
        ++kept;
    }
    return set;
}

PixelBox to_pixel(const NormRect& rect, int image_w, int image_h) {
    if (image_w < 1 || image_h < 1) {
        throw Error(ErrorCode::kInvalidParameter, "image dimensions must be positive");
    }
    const auto axis = [](float lo, float hi, int extent) {
        long start = std::lround(static_cast<double>(lo) * extent);
        long end = std::lround(static_cast<double>(hi) * extent);
        if (end <= start) {
            // narrower than a pixel: take the pixel holding the centre
            const double centre = (static_cast<double>(lo) + hi) / 2.0 * extent;
            start = static_cast<long>(std::floor(centre));
            end = start + 1;
        }
        start = std::clamp<long>(start, 0, extent - 1);
        end = std::clamp<long>(end, start + 1, extent);
        return std::pair<std::int32_t, std::int32_t>{static_cast<std::int32_t>(start),
                                                     static_cast<std::int32_t>(end - start)};
    };
    const auto [x, w] = axis(rect.x0, rect.x1, image_w);
    const auto [y, h] = axis(rect.y0, rect.y1, image_h);
    return {x, y, w, h};
}

double iou(const PixelBox& a, const PixelBox& b) noexcept {
    const std::int64_t ix0 = std::max<std::int64_t>(a.x, b.x);
    const std::int64_t iy0 = std::max<std::int64_t>(a.y, b.y);
    const std::int64_t ix1 = std::min<std::int64_t>(static_cast<std::int64_t>(a.x) + a.w,
                                                    static_cast<std::int64_t>(b.x) + b.w);
    const std::int64_t iy1 = std::min<std::int64_t>(static_cast<std::int64_t>(a.y) + a.h,
                                                    static_cast<std::int64_t>(b.y) + b.h);
    if (ix1 <= ix0 || iy1 <= iy0) return 0.0;
    const std::int64_t inter = (ix1 - ix0) * (iy1 - iy0);
    const std::int64_t uni = std::max<std::int64_t>(a.area(), 0) +
                             std::max<std::int64_t>(b.area(), 0) - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace patchwise
