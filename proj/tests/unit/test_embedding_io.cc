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

#include <cstring>
#include <filesystem>
#include <optional>

#include "binary_io.h"
#include "patchwise/embedding_io.h"
#include "patchwise/error.h"
#include "patchwise/rng.h"
#include "support.h"

using namespace patchwise;

namespace {

std::optional<ErrorCode> decode_error(std::span<const std::uint8_t> bytes) {
    try {
        decode_embeddings(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

void reseal(std::vector<std::uint8_t>& bytes) {
    const std::uint32_t crc = detail::crc32(std::span(bytes).first(bytes.size() - 4));
    for (int i = 0; i < 4; ++i) bytes[bytes.size() - 4 + i] = static_cast<std::uint8_t>(crc >> (8 * i));
}

void put_u16(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint16_t v) {
    bytes[at] = static_cast<std::uint8_t>(v);
    bytes[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

void put_f32(std::vector<std::uint8_t>& bytes, std::size_t at, float v) {
    std::memcpy(&bytes[at], &v, 4);
}

std::vector<ImageRecord> small_records() {
    Rng rng(3);
    auto recs = testing::random_records(rng, 2, 8, PatchLevel::kL1);
    recs[0].image_id = "abc";
    return recs;
}

// magic, version, dim, count, then the first record's id and sizes
constexpr std::size_t kFirstEntry = 4 + 2 + 2 + 4 + 2 + 3 + 4 + 4 + 2;

}  // namespace

TEST_CASE("embedding files round trip bit for bit") {
    const auto recs = small_records();
    const auto bytes = encode_embeddings(recs);
    CHECK(std::memcmp(bytes.data(), "PWR1", 4) == 0);
    CHECK(decode_embeddings(bytes) == recs);
    CHECK(encode_embeddings(decode_embeddings(bytes)) == bytes);
}

TEST_CASE("random record lists round trip") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(0, 6));
        const auto dim = static_cast<std::size_t>(rng.uniform_int(1, 40));
        auto recs = testing::random_records(rng, n, dim, static_cast<PatchLevel>(rng.uniform_int(0, 3)));
        for (auto& r : recs) {
            if (rng.uniform() < 0.3) r.entries.clear();
            if (rng.uniform() < 0.3 && !r.entries.empty()) {
                r.entries.push_back({kGtCropPatchId, {0.1F, 0.2F, 0.3F, 0.4F}, testing::random_unit(rng, dim)});
            }
        }
        const auto back = decode_embeddings(encode_embeddings(recs));
        CHECK(back == recs);
    }
}

TEST_CASE("empty record list round trips") {
    const std::vector<ImageRecord> none;
    const auto bytes = encode_embeddings(none);
    CHECK(decode_embeddings(bytes).empty());
}

TEST_CASE("files round trip through disk") {
    const auto recs = small_records();
    const auto path = std::filesystem::temp_directory_path() / "patchwise_test_roundtrip.pwr";
    write_embeddings(recs, path);
    CHECK(read_embeddings(path) == recs);
    std::filesystem::remove(path);
    try {
        read_embeddings(path);
        FAIL("missing file accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kIoError);
    }
}

TEST_CASE("header errors are distinct") {
    auto bytes = encode_embeddings(small_records());
    auto bad = bytes;
    bad[0] = 'X';
    CHECK(decode_error(bad) == ErrorCode::kBadMagic);
    bad = bytes;
    put_u16(bad, 4, 2);
    CHECK(decode_error(bad) == ErrorCode::kVersionMismatch);
    CHECK(decode_error(std::span(bytes).first(2)) == ErrorCode::kTruncated);
}

TEST_CASE("every truncation is reported") {
    const auto bytes = encode_embeddings(small_records());
    for (std::size_t n = 0; n < bytes.size(); ++n) {
        const auto err = decode_error(std::span(bytes).first(n));
        REQUIRE(err.has_value());
        CHECK((*err == ErrorCode::kTruncated || *err == ErrorCode::kChecksumMismatch ||
               *err == ErrorCode::kParseError));
    }
}

TEST_CASE("single byte corruption never decodes") {
    const auto bytes = encode_embeddings(small_records());
    Rng rng(5);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        auto bad = bytes;
        bad[i] ^= static_cast<std::uint8_t>(rng.uniform_int(1, 255));
        CHECK(decode_error(bad).has_value());
    }
}

TEST_CASE("trailing bytes are a parse error") {
    auto bytes = encode_embeddings(small_records());
    bytes.insert(bytes.end() - 4, 0x00);
    reseal(bytes);
    CHECK(decode_error(bytes) == ErrorCode::kParseError);
}

TEST_CASE("structural errors carry the entry offset") {
    const auto recs = small_records();
    const auto bytes = encode_embeddings(recs);
    const std::size_t entry_size = 2 + 16 + 4 * 8;

    auto dup = bytes;
    put_u16(dup, kFirstEntry + entry_size, recs[0].entries[0].patch_id);
    reseal(dup);
    try {
        decode_embeddings(dup);
        FAIL("duplicate patch id accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kParseError);
        CHECK(e.offset() == kFirstEntry + entry_size);
    }

    auto region = bytes;
    put_f32(region, kFirstEntry + 2, 1.5F);
    reseal(region);
    try {
        decode_embeddings(region);
        FAIL("invalid region accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kParseError);
        CHECK(e.offset() == kFirstEntry);
    }

    auto zero = bytes;
    for (std::size_t i = 0; i < 32; ++i) zero[kFirstEntry + 18 + i] = 0;
    reseal(zero);
    CHECK(decode_error(zero) == ErrorCode::kParseError);
}

TEST_CASE("encoding validates records") {
    Rng rng(8);
    auto recs = testing::random_records(rng, 2, 6, PatchLevel::kL1);
    CHECK(validate_records(recs) == 6);
    auto bad = recs;
    bad[1].entries[0].descriptor = testing::random_unit(rng, 7);
    CHECK_THROWS_AS(encode_embeddings(bad), Error);
    bad = recs;
    bad[0].entries[1].patch_id = bad[0].entries[0].patch_id;
    CHECK_THROWS_AS(encode_embeddings(bad), Error);
    bad = recs;
    bad[0].entries[0].region = {0.5F, 0.5F, 0.2F, 0.9F};
    CHECK_THROWS_AS(encode_embeddings(bad), Error);
}

TEST_CASE("ground truth lines round trip") {
    std::vector<GroundTruthQuery> gt(2);
    gt[0].query_id = "q0";
    gt[0].descriptor_ref = "query";
    gt[0].positives = {{"img_00001", {3, 4, 20, 10}, 128, 96}, {"img_00007", {0, 0, 5, 5}, 64, 64}};
    gt[1].query_id = "q1";
    gt[1].descriptor_ref = "q1";
    const std::string text = format_ground_truth(gt);
    CHECK(text.find("\"bbox\":[3,4,20,10]") != std::string::npos);
    CHECK(parse_ground_truth(text) == gt);
    CHECK(parse_ground_truth(text + "\n\n") == gt);
}

TEST_CASE("ground truth errors point into the offending line") {
    const std::string good = R"({"query_id":"q0","descriptor_ref":"q0","positives":[]})";
    const auto expect_error = [](const std::string& text, std::uint64_t offset) {
        try {
            parse_ground_truth(text);
            FAIL("accepted: " << text);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::kParseError);
            REQUIRE(e.offset().has_value());
            CHECK(*e.offset() >= offset);
            CHECK(*e.offset() < text.size());
        }
    };
    const std::uint64_t second = good.size() + 1;
    expect_error(good + "\n{not json", second);
    expect_error(good + "\n" + R"({"query_id":"q1","descriptor_ref":"q1","positives":[{"image_id":"a","bbox":[1,2,3]}]})",
                 second);
    expect_error(good + "\n" +
                     R"({"query_id":"q1","descriptor_ref":"q1","positives":[{"image_id":"a","bbox":[1,2,3,4]}]})",
                 second);
    const std::string pos = R"({"image_id":"a","bbox":[1,2,3,4],"width":9,"height":9})";
    expect_error(good + "\n" + R"({"query_id":"q1","descriptor_ref":"q1","positives":[)" + pos + "," + pos + "]}",
                 second);
}
