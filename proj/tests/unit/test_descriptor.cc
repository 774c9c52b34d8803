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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "patchwise/descriptor.h"
#include "patchwise/error.h"
#include "support.h"

using namespace patchwise;

TEST_CASE("normalize fixtures") {
    const std::vector<float> v34{3.0F, 4.0F};
    const Descriptor d = Descriptor::normalize(v34);
    REQUIRE(d.dim() == 2);
    CHECK(d.values()[0] == Catch::Approx(0.6).margin(1e-7));
    CHECK(d.values()[1] == Catch::Approx(0.8).margin(1e-7));

    const std::vector<float> ones{1.0F, 1.0F, 1.0F, 1.0F};
    const Descriptor q = Descriptor::normalize(ones);
    for (float x : q.values()) CHECK(x == 0.5F);

    const std::vector<float> unit{0.0F, 1.0F, 0.0F};
    const Descriptor u = Descriptor::normalize(unit);
    CHECK(std::vector<float>(u.values().begin(), u.values().end()) == unit);
}

TEST_CASE("normalize rejects degenerate input") {
    const std::vector<float> zeros(8, 0.0F);
    try {
        Descriptor::normalize(zeros);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kDegenerateInput);
    }
    CHECK_THROWS_AS(Descriptor::normalize(std::vector<float>{}), Error);
    CHECK_THROWS_AS(Descriptor::normalize(std::vector<float>{1.0F, NAN}), Error);
}

TEST_CASE("normalize is idempotent and preserves direction") {
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
        const std::size_t dim = static_cast<std::size_t>(rng.uniform_int(1, 300));
        std::vector<float> raw = testing::random_raw(rng, dim);
        const float scale = static_cast<float>(std::exp(rng.uniform(-8.0, 8.0)));
        for (float& x : raw) x *= scale;
        const Descriptor once = Descriptor::normalize(raw);
        const Descriptor twice = Descriptor::normalize(once.values());
        CHECK(once == twice);
        const double norm = std::sqrt(dot(once.values(), once.values()));
        CHECK(std::abs(norm - 1.0) <= 1e-5);
        // cosine between raw and normalized is 1
        const double cos = dot(raw, once.values()) / std::sqrt(dot(raw, raw));
        CHECK(cos == Catch::Approx(1.0).margin(1e-5));
    }
}

TEST_CASE("dot and distance") {
    const std::vector<float> a{1.0F, 2.0F, 3.0F};
    const std::vector<float> b{4.0F, -5.0F, 6.0F};
    CHECK(dot(a, b) == 12.0);
    CHECK(squared_l2(a, b) == 9.0 + 49.0 + 9.0);
    CHECK_THROWS_AS(dot(a, std::vector<float>{1.0F}), Error);
}
