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

#include "binary_io.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "patchwise/error.h"

namespace patchwise::detail {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    const std::uint8_t* data = bytes.data();
    std::size_t left = bytes.size();
    while (left > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, std::numeric_limits<uInt>::max()));
        crc = ::crc32(crc, data, chunk);
        data += chunk;
        left -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

void ByteWriter::u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::f32(float v) {
    u32(std::bit_cast<std::uint32_t>(v));
}

void ByteWriter::raw(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> ByteWriter::finish_with_crc() {
    const std::uint32_t crc = crc32(buf_);
    u32(crc);
    return std::move(buf_);
}

void ByteReader::require(std::size_t n) const {
    if (n > remaining()) {
        throw Error(ErrorCode::kTruncated,
                    "unexpected end of data: need " + std::to_string(n) + " bytes, have " +
                        std::to_string(remaining()),
                    pos_);
    }
}

std::uint8_t ByteReader::u8() {
    require(1);
    return bytes_[pos_++];
}

std::uint16_t ByteReader::u16() {
    require(2);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    require(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 8;
    return v;
}

float ByteReader::f32() {
    return std::bit_cast<float>(u32());
}

std::string ByteReader::text(std::size_t n) {
    require(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
}

void ByteReader::skip(std::size_t n) {
    require(n);
    pos_ += n;
}

ByteReader open_envelope(std::span<const std::uint8_t> bytes, std::string_view magic,
                         std::uint16_t version, std::string_view what) {
    const std::string name(what);
    if (bytes.size() < magic.size()) {
        throw Error(ErrorCode::kTruncated, name + " is shorter than its magic number", bytes.size());
    }
    if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
        throw Error(ErrorCode::kBadMagic, name + " does not start with '" + std::string(magic) + "'", 0);
    }
    ByteReader header(bytes);
    header.skip(magic.size());
    const std::uint16_t found = header.u16();
    if (found != version) {
        throw Error(ErrorCode::kVersionMismatch,
                    name + " version " + std::to_string(found) + " is not supported (expected " +
                        std::to_string(version) + ")",
                    magic.size());
    }
    const std::size_t body_end = bytes.size() >= magic.size() + 2 + 4 ? bytes.size() - 4 : magic.size() + 2;
    ByteReader body(bytes.first(body_end));
    body.skip(magic.size() + 2);
    return body;
}

void close_envelope(std::span<const std::uint8_t> bytes, const ByteReader& body, std::string_view what) {
    const std::string name(what);
    if (body.remaining() != 0) {
        throw Error(ErrorCode::kParseError, name + " has unexpected trailing bytes", body.offset());
    }
    if (bytes.size() < body.offset() + 4) {
        throw Error(ErrorCode::kTruncated, name + " is missing its checksum", bytes.size());
    }
    ByteReader trailer(bytes.subspan(body.offset()));
    const std::uint32_t stored = trailer.u32();
    if (stored != crc32(bytes.first(body.offset()))) {
        throw Error(ErrorCode::kChecksumMismatch, name + " checksum does not match its contents",
                    body.offset());
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "' for reading");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::kIoError, "failed reading '" + path.string() + "'");
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
        throw Error(ErrorCode::kIoError, "failed writing '" + path.string() + "'");
    }
}

}  // namespace patchwise::detail
