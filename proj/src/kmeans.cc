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

#include "patchwise/kmeans.h"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>

#include "patchwise/descriptor.h"
#include "patchwise/error.h"
#include "patchwise/rng.h"

namespace patchwise {

std::uint32_t nearest_centroid(std::span<const float> centroids, std::size_t dim, std::span<const float> v,
                               double* distance) {
    const std::size_t k = centroids.size() / dim;
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_l2(centroids.subspan(c * dim, dim), v);
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::uint32_t>(c);
        }
    }
    if (distance != nullptr) *distance = best_d;
    return best;
}

std::size_t count_distinct(std::span<const float> points, std::size_t dim) {
    const std::size_t n = points.size() / dim;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto bits = [&](std::size_t row, std::size_t j) { return std::bit_cast<std::uint32_t>(points[row * dim + j]); };
    const auto less = [&](std::size_t a, std::size_t b) {
        for (std::size_t j = 0; j < dim; ++j) {
            if (bits(a, j) != bits(b, j)) return bits(a, j) < bits(b, j);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = n > 0 ? 1 : 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

namespace {

double assign(std::span<const float> points, std::size_t dim, const std::vector<float>& centroids,
              std::vector<std::uint32_t>& assignment, std::vector<double>& distance) {
    const std::size_t n = assignment.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        assignment[i] = nearest_centroid(centroids, dim, points.subspan(i * dim, dim), &distance[i]);
        total += distance[i];
    }
    return total;
}

std::vector<float> seed_plus_plus(std::span<const float> points, std::size_t dim, std::size_t k, Rng& rng) {
    const std::size_t n = points.size() / dim;
    std::vector<float> centroids;
    centroids.reserve(k * dim);
    const auto take = [&](std::size_t i) {
        centroids.insert(centroids.end(), points.begin() + static_cast<std::ptrdiff_t>(i * dim),
                         points.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    };
    take(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)));

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_l2(points.subspan(i * dim, dim), centroids);
    while (centroids.size() < k * dim) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double run = 0.0;
            pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                run += d2[i];
                if (d2[i] > 0.0 && run > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                // Rounding left the target past the last positive weight.
                for (std::size_t i = n; i-- > 0;) {
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
        }
        take(pick);
        const std::span<const float> added(&centroids[centroids.size() - dim], dim);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_l2(points.subspan(i * dim, dim), added));
    }
    return centroids;
}

}  // namespace

KMeansResult kmeans(std::span<const float> points, std::size_t dim, const KMeansOptions& options) {
    if (dim == 0 || points.empty() || points.size() % dim != 0) {
        throw Error(ErrorCode::kInvalidParameter, "k-means needs at least one point of positive dimension");
    }
    if (options.k < 1) {
        throw Error(ErrorCode::kInvalidParameter, "k must be at least 1");
    }
    if (options.max_iters < 0) {
        throw Error(ErrorCode::kInvalidParameter, "max_iters must be non-negative");
    }
    const std::size_t n = points.size() / dim;
    const std::size_t k = options.k;

    KMeansResult out;
    out.k = k;
    out.dim = dim;
    const std::size_t distinct = count_distinct(points, dim);
    if (k > distinct) {
        out.warnings.push_back("k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct) +
                               " distinct points; duplicate centroids produced");
    }

    Rng rng(options.seed);
    out.centroids = seed_plus_plus(points, dim, k, rng);
    out.assignment.assign(n, 0);
    std::vector<double> distance(n);
    double objective = assign(points, dim, out.centroids, out.assignment, distance);
    out.objective.push_back(objective);

    std::vector<double> sums(k * dim);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < options.max_iters && objective > 0.0; ++iter) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = out.assignment[i];
            ++counts[c];
            for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += points[i * dim + j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < dim; ++j) {
                out.centroids[c * dim + j] = static_cast<float>(sums[c * dim + j] / static_cast<double>(counts[c]));
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            const auto far = static_cast<std::size_t>(
                std::max_element(distance.begin(), distance.end()) - distance.begin());
            if (distance[far] <= 0.0) break;
            std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(far * dim), dim,
                        out.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
            distance[far] = 0.0;
        }

        const double previous = objective;
        objective = assign(points, dim, out.centroids, out.assignment, distance);
        out.objective.push_back(objective);
        out.iterations = iter + 1;
        if (previous - objective <= options.tolerance * previous) break;
    }
    return out;
}

}  // namespace patchwise
