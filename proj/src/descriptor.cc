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

#include "patchwise/descriptor.h"

#include <cmath>

#include "patchwise/error.h"

namespace patchwise {

double dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "dot product of vectors with different lengths");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

double squared_l2(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "distance between vectors with different lengths");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += diff * diff;
    }
    return acc;
}

Descriptor Descriptor::normalize(std::span<const float> raw) {
    if (raw.empty()) {
        throw Error(ErrorCode::kDegenerateInput, "cannot normalize an empty vector");
    }
    double sq = 0.0;
    for (float v : raw) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::kDegenerateInput, "vector has a non-finite component");
        }
        sq += static_cast<double>(v) * static_cast<double>(v);
    }
    if (sq == 0.0) {
        throw Error(ErrorCode::kDegenerateInput, "cannot normalize an all-zero vector");
    }
    const double norm = std::sqrt(sq);
    std::vector<float> out(raw.begin(), raw.end());
    if (std::abs(norm - 1.0) > 1e-6) {
        for (float& v : out) v = static_cast<float>(static_cast<double>(v) / norm);
    }
    return Descriptor(std::move(out));
}

float Descriptor::dot(const Descriptor& other) const {
    return static_cast<float>(patchwise::dot(values_, other.values_));
}

}  // namespace patchwise
