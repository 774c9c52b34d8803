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
#include <span>
#include <vector>

namespace patchwise {

/// Inner product accumulated in double, in index order.
double dot(std::span<const float> a, std::span<const float> b);

/// Squared L2 distance accumulated in double, in index order.
double squared_l2(std::span<const float> a, std::span<const float> b);

/// Unit-L2 float vector; cosine similarity reduces to a dot product.
class Descriptor {
public:
    Descriptor() = default;

    /// Scales raw to unit length. Vectors whose norm is already within 1e-6
    /// of one are kept bit-for-bit, which makes the operation idempotent.
    static Descriptor normalize(std::span<const float> raw);

    std::span<const float> values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    float dot(const Descriptor& other) const;

    friend bool operator==(const Descriptor&, const Descriptor&) = default;

private:
    explicit Descriptor(std::vector<float> values) : values_(std::move(values)) {}

    std::vector<float> values_;
};

}  // namespace patchwise
