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

#include "patchwise/index_io.h"

#include "binary_io.h"
#include "patchwise/error.h"

namespace patchwise {

namespace {

constexpr std::string_view kMagic = "PWIX";
constexpr std::string_view kWhat = "index file";
constexpr std::size_t kRowBytes = 4 + 2 + 16;

void put_header(detail::ByteWriter& w, IndexKind kind, std::span<const ImageInfo> images) {
    w.text(kMagic);
    w.u16(kIndexFormatVersion);
    w.u8(static_cast<std::uint8_t>(kind));
    w.u32(static_cast<std::uint32_t>(images.size()));
    for (const ImageInfo& info : images) {
        if (info.image_id.size() > UINT16_MAX) {
            throw Error(ErrorCode::kInvalidParameter, "image id longer than 65535 bytes");
        }
        w.u16(static_cast<std::uint16_t>(info.image_id.size()));
        w.text(info.image_id);
        w.u32(info.width);
        w.u32(info.height);
    }
}

void put_row(detail::ByteWriter& w, const PatchRow& row) {
    w.u32(row.image);
    w.u16(row.patch_id);
    w.f32(row.region.x0);
    w.f32(row.region.y0);
    w.f32(row.region.x1);
    w.f32(row.region.y1);
}

PatchRow get_row(detail::ByteReader& r) {
    PatchRow row;
    row.image = r.u32();
    row.patch_id = r.u16();
    row.region.x0 = r.f32();
    row.region.y0 = r.f32();
    row.region.x1 = r.f32();
    row.region.y1 = r.f32();
    return row;
}

std::vector<float> get_floats(detail::ByteReader& r, std::uint64_t count) {
    if (count > r.remaining() / 4) r.require(r.remaining() + 1);
    std::vector<float> out(static_cast<std::size_t>(count));
    for (float& v : out) v = r.f32();
    return out;
}

// Multiplication guarded against overflow on corrupted sizes.
std::uint64_t checked_product(std::uint64_t a, std::uint64_t b, const detail::ByteReader& r) {
    if (a != 0 && b > UINT64_MAX / a) {
        throw Error(ErrorCode::kParseError, "size field overflows", r.offset());
    }
    return a * b;
}

}  // namespace

std::vector<std::uint8_t> encode_index(const FlatIndex& index) {
    detail::ByteWriter w;
    put_header(w, IndexKind::kFlat, index.images());
    w.u32(static_cast<std::uint32_t>(index.dim()));
    w.u64(index.row_count());
    for (const PatchRow& row : index.rows()) put_row(w, row);
    for (float v : index.matrix()) w.f32(v);
    return w.finish_with_crc();
}

std::vector<std::uint8_t> encode_index(const IvfPqIndex& index) {
    const Codebook& cb = index.codebook();
    if (cb.pool_tag.size() > UINT16_MAX) {
        throw Error(ErrorCode::kInvalidParameter, "pool tag longer than 65535 bytes");
    }
    detail::ByteWriter w;
    put_header(w, IndexKind::kIvfPq, index.images());
    w.u32(static_cast<std::uint32_t>(cb.dim));
    w.u32(static_cast<std::uint32_t>(cb.m));
    w.u32(static_cast<std::uint32_t>(cb.nlist));
    w.u8(static_cast<std::uint8_t>(kPqBits));
    w.u64(cb.seed);
    w.u16(static_cast<std::uint16_t>(cb.pool_tag.size()));
    w.text(cb.pool_tag);
    for (float v : cb.coarse) w.f32(v);
    for (float v : cb.sub) w.f32(v);
    for (const InvertedList& list : index.lists()) {
        w.u32(static_cast<std::uint32_t>(list.rows.size()));
        for (const PatchRow& row : list.rows) put_row(w, row);
        w.raw(list.codes);
    }
    return w.finish_with_crc();
}

std::vector<std::uint8_t> encode_index(const Index& index) {
    return std::visit([](const auto& idx) { return encode_index(idx); }, index);
}

Index decode_index(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r = detail::open_envelope(bytes, kMagic, kIndexFormatVersion, kWhat);
    const std::size_t kind_offset = r.offset();
    const std::uint8_t kind = r.u8();
    if (kind > static_cast<std::uint8_t>(IndexKind::kIvfPq)) {
        throw Error(ErrorCode::kParseError, "unknown index kind " + std::to_string(kind), kind_offset);
    }
    const std::uint32_t n_images = r.u32();
    std::vector<ImageInfo> images;
    images.reserve(std::min<std::size_t>(n_images, r.remaining() / 10));
    for (std::uint32_t i = 0; i < n_images; ++i) {
        ImageInfo info;
        info.image_id = r.text(r.u16());
        info.width = r.u32();
        info.height = r.u32();
        images.push_back(std::move(info));
    }

    const auto finish = [&](auto make) -> Index {
        const std::size_t end = r.offset();
        detail::close_envelope(bytes, r, kWhat);
        try {
            return make();
        } catch (const Error& err) {
            throw Error(ErrorCode::kParseError, std::string("inconsistent index contents: ") + err.what(), end);
        }
    };

    if (kind == static_cast<std::uint8_t>(IndexKind::kFlat)) {
        const std::uint32_t dim = r.u32();
        const std::uint64_t n_rows = r.u64();
        r.require(checked_product(n_rows, kRowBytes, r));
        std::vector<PatchRow> rows(static_cast<std::size_t>(n_rows));
        for (PatchRow& row : rows) row = get_row(r);
        std::vector<float> matrix = get_floats(r, checked_product(n_rows, dim, r));
        return finish([&] { return Index(FlatIndex::from_parts(dim, std::move(images), std::move(rows), std::move(matrix))); });
    }

    Codebook cb;
    cb.dim = r.u32();
    cb.m = r.u32();
    cb.nlist = r.u32();
    const std::size_t nbits_offset = r.offset();
    if (r.u8() != kPqBits) {
        throw Error(ErrorCode::kParseError, "unsupported code width", nbits_offset);
    }
    cb.seed = r.u64();
    cb.pool_tag = r.text(r.u16());
    if (cb.m == 0 || cb.dim == 0 || cb.dim % cb.m != 0 || cb.nlist == 0) {
        throw Error(ErrorCode::kParseError, "invalid quantizer shape", nbits_offset);
    }
    cb.coarse = get_floats(r, checked_product(cb.nlist, cb.dim, r));
    cb.sub = get_floats(r, checked_product(kSubCentroids, cb.dim, r));
    std::vector<InvertedList> lists(cb.nlist);
    for (InvertedList& list : lists) {
        const std::uint32_t count = r.u32();
        r.require(checked_product(count, kRowBytes + cb.m, r));
        list.rows.resize(count);
        for (PatchRow& row : list.rows) row = get_row(r);
        list.codes.resize(static_cast<std::size_t>(count) * cb.m);
        for (std::uint8_t& c : list.codes) c = r.u8();
    }
    return finish([&] { return Index(IvfPqIndex::from_parts(std::move(cb), std::move(images), std::move(lists))); });
}

void write_index(const Index& index, const std::filesystem::path& path) {
    detail::write_file(path, encode_index(index));
}

Index read_index(const std::filesystem::path& path) {
    return decode_index(detail::read_file(path));
}

}  // namespace patchwise
