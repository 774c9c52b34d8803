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

#include "patchwise/embed.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "patchwise/error.h"
#include "patchwise/rng.h"

namespace patchwise {

namespace {

constexpr int kPoolCells = kPoolSize * kPoolSize;
constexpr double kMeanWeight = 0.1;
constexpr double kCoarseWeight = 0.1;

// Orthonormal 1-D DCT-II basis, basis[k][n].
std::vector<double> dct_basis() {
    std::vector<double> basis(kPoolCells);
    for (int k = 0; k < kPoolSize; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / kPoolSize);
        for (int n = 0; n < kPoolSize; ++n) {
            basis[k * kPoolSize + n] =
                scale * std::cos(std::numbers::pi * (2 * n + 1) * k / (2.0 * kPoolSize));
        }
    }
    return basis;
}

// Rows of a random orthonormal set, Gram-Schmidt over seeded Gaussians.
std::vector<double> orthonormal_rows(int rows, int dim, Rng& rng) {
    std::vector<double> q(static_cast<std::size_t>(rows) * dim);
    for (int r = 0; r < rows; ++r) {
        double* row = &q[static_cast<std::size_t>(r) * dim];
        for (;;) {
            for (int j = 0; j < dim; ++j) row[j] = rng.normal();
            for (int pass = 0; pass < 2; ++pass) {
                for (int p = 0; p < r; ++p) {
                    const double* prev = &q[static_cast<std::size_t>(p) * dim];
                    double proj = 0.0;
                    for (int j = 0; j < dim; ++j) proj += row[j] * prev[j];
                    for (int j = 0; j < dim; ++j) row[j] -= proj * prev[j];
                }
            }
            double norm = 0.0;
            for (int j = 0; j < dim; ++j) norm += row[j] * row[j];
            norm = std::sqrt(norm);
            if (norm > 1e-6) {
                for (int j = 0; j < dim; ++j) row[j] /= norm;
                break;
            }
        }
    }
    return q;
}

std::string numbered_id(const char* prefix, int n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%05d", prefix, n);
    return buf;
}

SynthImage clutter_image(std::string id, int size, double amplitude, double jitter, int per_octave, Rng& rng) {
    SynthImage img;
    img.image_id = std::move(id);
    img.width = size;
    img.height = size;
    img.pixels.assign(static_cast<std::size_t>(size) * size, 0.5F);

    const double amp = amplitude * rng.uniform(1.0 - jitter, 1.0 + jitter);
    // Octaves of period from size / 16 up to the full side, several
    // randomly oriented gratings per octave.
    constexpr int kOctaves = 5;
    const int n = kOctaves * per_octave;
    const double unit = amp / std::sqrt(static_cast<double>(per_octave));
    std::vector<double> fx(n), fy(n), phase(n);
    for (int j = 0; j < n; ++j) {
        const double period = size / 16.0 * std::exp2(j / per_octave) * rng.uniform(0.9, 1.1);
        const double theta = rng.uniform(0.0, std::numbers::pi);
        phase[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        fx[j] = 2.0 * std::numbers::pi * std::cos(theta) / period;
        fy[j] = 2.0 * std::numbers::pi * std::sin(theta) / period;
    }
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double v = 0.0;
            for (int j = 0; j < n; ++j) {
                v += std::sin(fx[j] * (x + 0.5) + fy[j] * (y + 0.5) + phase[j]);
            }
            img.pixels[static_cast<std::size_t>(y) * size + x] =
                static_cast<float>(std::clamp(0.5 + unit * v, 0.0, 1.0));
        }
    }
    return img;
}

float checker(int x, int y, double contrast) {
    return static_cast<float>(((x + y) % 2 == 0) ? 0.5 - contrast : 0.5 + contrast);
}

}  // namespace

ToyEmbedder::ToyEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim < 1 || dim > 65535) {
        throw Error(ErrorCode::kInvalidParameter, "descriptor dimension must lie in [1, 65535]");
    }
    // Coefficient order: mean, then every frequency pair with max(kx, ky) >= 2
    // from coarse to fine, then the three coarsest gradients.
    std::vector<int> order(kPoolCells);
    std::iota(order.begin(), order.end(), 0);
    const auto band = [](int i) { return std::max(i / kPoolSize, i % kPoolSize); };
    const auto rank = [&](int i) { return band(i) == 0 ? 0 : band(i) == 1 ? 2 : 1; };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (rank(a) != rank(b)) return rank(a) < rank(b);
        return band(a) < band(b);
    });
    const int used = std::min(dim, kPoolCells);
    order.resize(static_cast<std::size_t>(used));

    Rng rng(seed);
    const std::vector<double> q = orthonormal_rows(used, dim, rng);
    const std::vector<double> basis = dct_basis();

    projection_.assign(static_cast<std::size_t>(kPoolCells) * dim, 0.0);
    for (int s = 0; s < used; ++s) {
        const int coeff = order[static_cast<std::size_t>(s)];
        const int ky = coeff / kPoolSize;
        const int kx = coeff % kPoolSize;
        const double weight = band(coeff) == 0 ? kMeanWeight : band(coeff) == 1 ? kCoarseWeight : 1.0;
        const double* qrow = &q[static_cast<std::size_t>(s) * dim];
        for (int p = 0; p < kPoolCells; ++p) {
            const double b = basis[ky * kPoolSize + p / kPoolSize] * basis[kx * kPoolSize + p % kPoolSize];
            double* prow = &projection_[static_cast<std::size_t>(p) * dim];
            for (int j = 0; j < dim; ++j) prow[j] += b * weight * qrow[j];
        }
    }
}

std::vector<double> ToyEmbedder::pool(const SynthImage& image, const NormRect& region) const {
    if (!region.valid()) {
        throw Error(ErrorCode::kDegenerateInput, "region is empty or outside the unit square");
    }
    if (image.width < 1 || image.height < 1 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw Error(ErrorCode::kDegenerateInput, "image has no pixels");
    }
    const PixelBox box = to_pixel(region, image.width, image.height);
    std::vector<double> pooled(kPoolCells);
    for (int i = 0; i < kPoolSize; ++i) {
        const int r0 = i * box.h / kPoolSize;
        const int r1 = std::max(r0 + 1, (i + 1) * box.h / kPoolSize);
        for (int j = 0; j < kPoolSize; ++j) {
            const int c0 = j * box.w / kPoolSize;
            const int c1 = std::max(c0 + 1, (j + 1) * box.w / kPoolSize);
            double sum = 0.0;
            for (int r = r0; r < r1; ++r) {
                for (int c = c0; c < c1; ++c) sum += image.at(box.x + c, box.y + r);
            }
            pooled[i * kPoolSize + j] = sum / ((r1 - r0) * (c1 - c0));
        }
    }
    return pooled;
}

Descriptor ToyEmbedder::project(const std::vector<double>& pooled) const {
    std::vector<double> acc(static_cast<std::size_t>(dim_), 0.0);
    for (int p = 0; p < kPoolCells; ++p) {
        const double v = pooled[p];
        const double* prow = &projection_[static_cast<std::size_t>(p) * dim_];
        for (int j = 0; j < dim_; ++j) acc[j] += v * prow[j];
    }
    std::vector<float> out(acc.begin(), acc.end());
    return Descriptor::normalize(out);
}

Descriptor ToyEmbedder::embed(const SynthImage& image, const NormRect& region) const {
    return project(pool(image, region));
}

Descriptor ToyEmbedder::embed_box(const SynthImage& image, const PixelBox& box) const {
    return embed(image, to_norm(box, image.width, image.height));
}

Descriptor toy_embed(const SynthImage& image, const NormRect& region, int dim, std::uint64_t seed) {
    return ToyEmbedder(dim, seed).embed(image, region);
}

SynthDataset synth_dataset(const SynthConfig& config) {
    if (config.n_images < 1) {
        throw Error(ErrorCode::kInvalidParameter, "n_images must be at least 1");
    }
    if (config.image_size < 1) {
        throw Error(ErrorCode::kInvalidParameter, "image_size must be at least 1");
    }
    if (config.n_positives < 0 || config.n_positives > config.n_images) {
        throw Error(ErrorCode::kInvalidParameter, "n_positives must lie in [0, n_images]");
    }
    if (!(config.target_min > 0.0) || config.target_max > 1.0 || config.target_min > config.target_max) {
        throw Error(ErrorCode::kInvalidParameter, "target size range must satisfy 0 < min <= max <= 1");
    }
    const int size = config.image_size;
    Rng rng(config.seed);

    SynthDataset out;
    out.images.reserve(static_cast<std::size_t>(config.n_images));
    for (int i = 0; i < config.n_images; ++i) {
        out.images.push_back(clutter_image(numbered_id("img_", i), size, config.clutter_amplitude,
                                           config.clutter_jitter, config.clutter_per_octave, rng));
    }

    std::vector<int> order(static_cast<std::size_t>(config.n_images));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < config.n_positives; ++i) {
        const auto j = rng.uniform_int(i, config.n_images - 1);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<int> chosen(order.begin(), order.begin() + config.n_positives);
    std::sort(chosen.begin(), chosen.end());

    const double min_offset = config.min_center_offset * size;
    for (int index : chosen) {
        SynthImage& img = out.images[static_cast<std::size_t>(index)];
        PixelBox box;
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const double frac = rng.uniform(config.target_min, config.target_max);
            const int side = std::clamp(static_cast<int>(std::lround(frac * size)), 1, size);
            const int x = static_cast<int>(rng.uniform_int(0, size - side));
            const int y = static_cast<int>(rng.uniform_int(0, size - side));
            const double cx = x + side / 2.0 - size / 2.0;
            const double cy = y + side / 2.0 - size / 2.0;
            if (std::hypot(cx, cy) >= min_offset) {
                box = {x, y, side, side};
                placed = true;
            }
        }
        if (!placed) {
            throw Error(ErrorCode::kInvalidParameter, "cannot place target with the requested centre offset");
        }
        for (int r = 0; r < box.h; ++r) {
            for (int c = 0; c < box.w; ++c) {
                img.pixels[static_cast<std::size_t>(box.y + r) * size + box.x + c] = checker(c, r, config.target_contrast);
            }
        }
        img.planted_box = box;
        img.instance_id = "target";
        out.positives.push_back({img.image_id, box, size, size});
    }

    out.query.image_id = "query";
    out.query.width = size;
    out.query.height = size;
    out.query.instance_id = "target";
    out.query.planted_box = PixelBox{0, 0, size, size};
    out.query.pixels.resize(static_cast<std::size_t>(size) * size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) out.query.pixels[static_cast<std::size_t>(r) * size + c] = checker(c, r, config.target_contrast);
    }
    return out;
}

}  // namespace patchwise
