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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace patchwise::detail {

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void raw(std::span<const std::uint8_t> bytes);
    void text(std::string_view s) { raw({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}); }

    /// Appends the CRC-32 of everything written so far and releases the buffer.
    std::vector<std::uint8_t> finish_with_crc();

    std::size_t size() const noexcept { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Little-endian cursor over a buffer. Every read past the end throws a
/// truncation error carrying the offset.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    std::string text(std::size_t n);
    void skip(std::size_t n);

    /// Throws a truncation error unless n more bytes are available.
    void require(std::size_t n) const;

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

/// Shared envelope of the binary formats: 4-byte magic, u16 version, body,
/// CRC-32 trailer. Checks magic and version, then hands back a reader over
/// the body (positioned after the version) whose end excludes the trailer.
ByteReader open_envelope(std::span<const std::uint8_t> bytes, std::string_view magic,
                         std::uint16_t version, std::string_view what);

/// Called once the body has been parsed: rejects trailing bytes and verifies
/// the checksum.
void close_envelope(std::span<const std::uint8_t> bytes, const ByteReader& body,
                    std::string_view what);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace patchwise::detail
