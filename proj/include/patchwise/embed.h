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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchwise/descriptor.h"
#include "patchwise/geometry.h"

namespace patchwise {

/// Grayscale image with intensities in [0, 1], row-major.
struct SynthImage {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<float> pixels;
    std::optional<PixelBox> planted_box;
    std::string instance_id;

    float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr int kPoolSize = 16;

/// Deterministic stand-in for a frozen image encoder. A region is cropped,
/// average-pooled to 16x16 and projected to d dimensions by a seeded matrix.
/// The projection emphasises local structure: the mean intensity enters with a
/// small weight and the coarsest gradients come last.
class ToyEmbedder {
public:
    ToyEmbedder(int dim, std::uint64_t seed);

    int dim() const noexcept { return dim_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// 16x16 average pool of the pixel box the region maps to.
    std::vector<double> pool(const SynthImage& image, const NormRect& region) const;

    Descriptor embed(const SynthImage& image, const NormRect& region) const;
    Descriptor embed_box(const SynthImage& image, const PixelBox& box) const;

    /// Row-major 256 x dim projection matrix.
    std::span<const double> projection() const noexcept { return projection_; }

private:
    Descriptor project(const std::vector<double>& pooled) const;

    int dim_;
    std::uint64_t seed_;
    std::vector<double> projection_;
};

/// One-shot form of ToyEmbedder(d, seed).embed(image, region).
Descriptor toy_embed(const SynthImage& image, const NormRect& region, int dim, std::uint64_t seed);

struct SynthConfig {
    int n_images = 100;
    int image_size = 128;
    int n_positives = 1;
    /// Planted target side as a fraction of the image side.
    double target_min = 0.30;
    double target_max = 0.316;
    /// Minimum distance between target centre and image centre, as a fraction
    /// of the image side.
    double min_center_offset = 0.0;
    double clutter_amplitude = 0.04;
    double clutter_jitter = 0.03;
    /// Background gratings per octave of period, from 1/16 of the side up
    /// to the full side.
    int clutter_per_octave = 1;
    /// Half the intensity swing of the planted checkerboard.
    double target_contrast = 0.3;
    std::uint64_t seed = 0;
};

struct SynthPositive {
    std::string image_id;
    PixelBox box;
    int width = 0;
    int height = 0;
};

struct SynthDataset {
    std::vector<SynthImage> images;
    /// Full-frame view of the planted texture.
    SynthImage query;
    std::vector<SynthPositive> positives;
};

/// Grating clutter backgrounds; n_positives randomly chosen images receive a
/// shared checkerboard texture at a random position and size.
SynthDataset synth_dataset(const SynthConfig& config);

}  // namespace patchwise
