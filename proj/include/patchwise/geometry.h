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
#include <string_view>
#include <vector>

namespace patchwise {

/// Axis-aligned region in normalized image coordinates, 0 <= x0 < x1 <= 1
/// and 0 <= y0 < y1 <= 1.
struct NormRect {
    float x0 = 0.0F;
    float y0 = 0.0F;
    float x1 = 1.0F;
    float y1 = 1.0F;

    bool valid() const noexcept;
    double area() const noexcept {
        return (static_cast<double>(x1) - x0) * (static_cast<double>(y1) - y0);
    }
    friend bool operator==(const NormRect&, const NormRect&) = default;
};

inline constexpr NormRect kFullImage{0.0F, 0.0F, 1.0F, 1.0F};

/// Pixel box as (x, y, w, h). Offsets may be negative for raw proposals;
/// boxes produced by to_pixel() always lie inside the image with w, h >= 1.
struct PixelBox {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t w = 1;
    std::int32_t h = 1;

    std::int64_t area() const noexcept {
        return static_cast<std::int64_t>(w) * static_cast<std::int64_t>(h);
    }
    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

enum class PatchLevel : std::uint8_t { kL0 = 0, kL1 = 1, kL2 = 2, kL3 = 3 };

/// Largest grid side at a level (L0 -> 1, ..., L3 -> 4).
int max_grid_size(PatchLevel level) noexcept;

/// Cumulative patch count: 1, 5, 14, 30.
std::size_t patch_count(PatchLevel level) noexcept;

/// Parses "l0".."l3" (case-insensitive).
PatchLevel parse_level(std::string_view text);
std::string_view level_name(PatchLevel level) noexcept;

enum class PatchStrategy : std::uint8_t { kGrid = 0, kSliding = 1, kExternal = 2 };

PatchStrategy parse_strategy(std::string_view text);
std::string_view strategy_name(PatchStrategy strategy) noexcept;

struct Patch {
    std::uint16_t id = 0;
    NormRect region;
    friend bool operator==(const Patch&, const Patch&) = default;
};

/// Ordered patches with dense ids 0..size-1. Patch 0 is always the full image.
struct PatchSet {
    PatchStrategy strategy = PatchStrategy::kGrid;
    std::vector<Patch> patches;

    std::size_t size() const noexcept { return patches.size(); }
};

/// Cumulative multi-scale grid: sizes 1..max_grid_size(level), each grid
/// enumerated row-major.
PatchSet grid_patches(PatchLevel level);

/// Global patch followed by overlapping square windows of side 1/g stepped by
/// stride_frac/g, for every grid size g > 1 of the level. The last window on
/// each axis is clamped flush with the image edge. Requires level >= L1 and
/// stride_frac in (0, 1].
PatchSet sliding_windows(PatchLevel level, double stride_frac);

inline constexpr std::size_t kDefaultMaxRegions = 20;

/// Full-image patch followed by up to max_count clamped, non-empty boxes in
/// input order.
PatchSet external_regions(std::span<const PixelBox> boxes, int image_w, int image_h,
                          std::size_t max_count = kDefaultMaxRegions);

/// Rounds half away from zero. The result is clamped inside the image and has
/// w, h >= 1; an axis narrower than one pixel maps to the pixel holding its
/// centre.
PixelBox to_pixel(const NormRect& rect, int image_w, int image_h);

/// Exact division of the box corners, clamped to [0, 1]. The result may be
/// empty (invalid) when the box lies outside the image.
NormRect to_norm(const PixelBox& box, int image_w, int image_h) noexcept;

/// Intersection over union; 0 for disjoint boxes.
double iou(const PixelBox& a, const PixelBox& b) noexcept;

}  // namespace patchwise
