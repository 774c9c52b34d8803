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
#include <map>
#include <set>

#include "patchwise/error.h"
#include "patchwise/flat_index.h"
#include "patchwise/ivfpq_index.h"
#include "patchwise/rng.h"
#include "support.h"

using namespace patchwise;

namespace {

/// Sub-centroids of norm 1/sqrt(m), so every code decodes to a unit vector.
Codebook unit_codebook(Rng& rng, std::size_t dim, std::size_t m, std::size_t nlist) {
    Codebook cb;
    cb.dim = dim;
    cb.m = m;
    cb.nlist = nlist;
    for (std::size_t c = 0; c < nlist; ++c) {
        const auto v = testing::random_unit(rng, dim);
        cb.coarse.insert(cb.coarse.end(), v.values().begin(), v.values().end());
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::size_t j = 0; j < m * kSubCentroids; ++j) {
        auto raw = testing::random_raw(rng, dim / m);
        double norm = 0.0;
        for (float x : raw) norm += static_cast<double>(x) * x;
        norm = std::sqrt(norm);
        for (float x : raw) cb.sub.push_back(static_cast<float>(x / norm * scale));
    }
    cb.pool_tag = "l3";
    return cb;
}

/// Records whose descriptors are exact codebook reconstructions.
std::vector<ImageRecord> codeword_records(Rng& rng, const Codebook& cb, std::size_t n) {
    auto recs = testing::random_records(rng, n, cb.dim, PatchLevel::kL2);
    for (auto& r : recs) {
        for (auto& e : r.entries) {
            PQCode code;
            for (std::size_t j = 0; j < cb.m; ++j) code.codes.push_back(static_cast<std::uint8_t>(rng.uniform_int(0, 255)));
            e.descriptor = Descriptor::normalize(decode(cb, code));
        }
    }
    return recs;
}

Codebook trained(Rng& rng, const std::vector<ImageRecord>& recs, std::size_t m, std::size_t nlist) {
    return train_codebook(select_training_pool(recs, {}), {.m = m, .nlist = nlist}, rng.next(), "l3");
}

}  // namespace

TEST_CASE("exhaustive probing on exact codewords reproduces flat search") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Codebook cb = unit_codebook(rng, 16, 4, 6);
        const auto recs = codeword_records(rng, cb, 30);
        const auto flat = FlatIndex::build(recs);
        const auto ivf = IvfPqIndex::build(recs, cb);
        const auto q = testing::random_unit(rng, 16);
        const auto a = flat.search(q, 10);
        const auto b = ivf.search(q, 10, cb.nlist);
        REQUIRE(a.hits.size() == b.hits.size());
        for (std::size_t i = 0; i < a.hits.size(); ++i) {
            CHECK(a.hits[i].image_id == b.hits[i].image_id);
            CHECK(a.hits[i].best_patch_id == b.hits[i].best_patch_id);
            CHECK(a.hits[i].best_region == b.hits[i].best_region);
            CHECK(a.hits[i].score == Catch::Approx(b.hits[i].score).margin(1e-6));
        }
    }
}

TEST_CASE("search equals an oracle over decoded codes in probed lists") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto recs = testing::random_records(rng, 25, 16, PatchLevel::kL2);
        const Codebook cb = trained(rng, recs, 4, 8);
        const auto ivf = IvfPqIndex::build(recs, cb);
        const auto q = testing::random_unit(rng, 16);
        const auto nprobe = static_cast<std::size_t>(rng.uniform_int(1, 8));

        std::map<std::string, testing::OracleHit> best;
        for (std::uint32_t l : ivf.probe_order(q, nprobe)) {
            const InvertedList& list = ivf.lists()[l];
            for (std::size_t r = 0; r < list.rows.size(); ++r) {
                double acc = 0.0;
                for (std::size_t j = 0; j < cb.m; ++j) {
                    acc += dot(q.values().subspan(j * cb.dsub(), cb.dsub()),
                               cb.sub_centroid(j, list.codes[r * cb.m + j]));
                }
                const auto s = static_cast<float>(acc);
                const PatchRow& row = list.rows[r];
                const std::string& id = ivf.images()[row.image].image_id;
                auto it = best.find(id);
                if (it == best.end() || s > it->second.score ||
                    (s == it->second.score && row.patch_id < it->second.patch_id)) {
                    best[id] = {id, s, row.patch_id, row.region};
                }
            }
        }
        std::vector<testing::OracleHit> oracle;
        for (auto& [id, h] : best) oracle.push_back(h);
        std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
            return a.score != b.score ? a.score > b.score : a.image_id < b.image_id;
        });
        if (oracle.size() > 10) oracle.resize(10);
        CHECK(testing::matches_oracle(ivf.search(q, 10, nprobe), oracle));
    }
}

TEST_CASE("a single probe only returns entries of the best list") {
    Rng rng(3);
    const auto recs = testing::random_records(rng, 40, 16, PatchLevel::kL2);
    const Codebook cb = trained(rng, recs, 4, 8);
    const auto ivf = IvfPqIndex::build(recs, cb);
    const auto q = testing::random_unit(rng, 16);
    const auto order = ivf.probe_order(q, 1);
    REQUIRE(order.size() == 1);
    CHECK(order[0] == coarse_assign(cb, q.values()));
    std::set<std::pair<std::string, std::uint16_t>> allowed;
    const InvertedList& list = ivf.lists()[order[0]];
    for (const PatchRow& row : list.rows) allowed.emplace(ivf.images()[row.image].image_id, row.patch_id);
    for (const auto& h : ivf.search(q, 100, 1).hits) CHECK(allowed.count({h.image_id, h.best_patch_id}) == 1);
}

TEST_CASE("probe order is by centroid score and clamps to nlist") {
    Rng rng(4);
    const Codebook cb = unit_codebook(rng, 8, 2, 5);
    const auto recs = codeword_records(rng, cb, 3);
    const auto ivf = IvfPqIndex::build(recs, cb);
    const auto q = testing::random_unit(rng, 8);
    const auto order = ivf.probe_order(q, 50);
    REQUIRE(order.size() == 5);
    for (std::size_t i = 1; i < order.size(); ++i) {
        CHECK(dot(q.values(), cb.coarse_centroid(order[i - 1])) >= dot(q.values(), cb.coarse_centroid(order[i])));
    }
    CHECK(ivf.search(q, 3, 50) == ivf.search(q, 3, 5));
}

TEST_CASE("every entry lands in its coarse list") {
    Rng rng(5);
    const auto recs = testing::random_records(rng, 20, 16, PatchLevel::kL1);
    const Codebook cb = trained(rng, recs, 4, 6);
    const auto ivf = IvfPqIndex::build(recs, cb);
    CHECK(ivf.entry_count() == 100);
    for (std::uint32_t l = 0; l < ivf.lists().size(); ++l) {
        const InvertedList& list = ivf.lists()[l];
        for (std::size_t r = 0; r < list.rows.size(); ++r) {
            const PatchRow& row = list.rows[r];
            const auto& rec = recs[row.image];
            const auto& entry = *std::find_if(rec.entries.begin(), rec.entries.end(),
                                              [&](const PatchEntry& e) { return e.patch_id == row.patch_id; });
            const PQCode code = encode(cb, entry.descriptor.values());
            CHECK(code.list == l);
            CHECK(std::equal(code.codes.begin(), code.codes.end(), list.codes.begin() + r * cb.m));
        }
    }
}

TEST_CASE("compression accounting") {
    const CompressionStats s = compression_stats(1000, 1024, 64, 64);
    CHECK(s.code_bytes == 64000);
    CHECK(s.raw_bytes == 4096000);
    CHECK(s.coarse_id_bytes == 1000);
    CHECK(s.codebook_bytes == 256ULL * 1024 * 4);
    CHECK(s.coarse_table_bytes == 64ULL * 1024 * 4);
    CHECK(s.compressed_bytes == s.code_bytes + s.coarse_id_bytes + s.codebook_bytes + s.coarse_table_bytes);
    CHECK(s.compression_ratio == Catch::Approx(4096000.0 / s.compressed_bytes));

    CHECK(coarse_id_width(256) == 1);
    CHECK(coarse_id_width(257) == 2);
    CHECK(coarse_id_width(65536) == 2);
    CHECK(coarse_id_width(65537) == 4);

    double prev = 0.0;
    for (int level = 0; level <= 3; ++level) {
        const auto count = 1000 * patch_count(static_cast<PatchLevel>(level));
        const double ratio = compression_stats(count, 256, 16, 64).compression_ratio;
        CHECK(ratio > prev);
        prev = ratio;
    }
    const CompressionStats u = uncompressed_stats(10, 8);
    CHECK(u.raw_bytes == 320);
    CHECK(u.compressed_bytes == 320);
    CHECK(u.compression_ratio == 1.0);
}

TEST_CASE("index stats follow the entry count") {
    Rng rng(6);
    const auto recs = testing::random_records(rng, 10, 16, PatchLevel::kL1);
    const auto ivf = IvfPqIndex::build(recs, trained(rng, recs, 4, 4));
    const CompressionStats s = ivf.stats();
    CHECK(s.vectors == 50);
    CHECK(s.code_bytes == 200);
}

TEST_CASE("ivfpq errors") {
    Rng rng(7);
    const Codebook cb = unit_codebook(rng, 8, 2, 3);
    const auto recs = codeword_records(rng, cb, 4);
    const auto ivf = IvfPqIndex::build(recs, cb);
    CHECK_THROWS_AS(ivf.search(testing::random_unit(rng, 8), 5, 0), Error);
    CHECK_THROWS_AS(ivf.search(testing::random_unit(rng, 8), 0, 1), Error);
    CHECK_THROWS_AS(ivf.search(testing::random_unit(rng, 9), 5, 1), Error);
    const auto other = testing::random_records(rng, 2, 16, PatchLevel::kL0);
    CHECK_THROWS_AS(IvfPqIndex::build(other, cb), Error);

    auto lists = std::vector<InvertedList>(ivf.lists().begin(), ivf.lists().end());
    std::vector<ImageInfo> images(ivf.images().begin(), ivf.images().end());
    CHECK_NOTHROW(IvfPqIndex::from_parts(cb, images, lists));
    auto short_lists = lists;
    short_lists.pop_back();
    CHECK_THROWS_AS(IvfPqIndex::from_parts(cb, images, short_lists), Error);
    auto bad_codes = lists;
    for (auto& l : bad_codes) {
        if (!l.rows.empty()) {
            l.codes.pop_back();
            break;
        }
    }
    CHECK_THROWS_AS(IvfPqIndex::from_parts(cb, images, bad_codes), Error);
    auto bad_image = lists;
    for (auto& l : bad_image) {
        if (!l.rows.empty()) {
            l.rows[0].image = 99;
            break;
        }
    }
    CHECK_THROWS_AS(IvfPqIndex::from_parts(cb, images, bad_image), Error);
}
