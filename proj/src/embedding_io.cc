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

#include "patchwise/embedding_io.h"

#include <json.hpp>

#include <set>
#include <sstream>

#include "binary_io.h"
#include "patchwise/error.h"

namespace patchwise {

namespace {

constexpr std::string_view kMagic = "PWR1";
constexpr std::string_view kWhat = "embedding file";

}  // namespace

std::size_t validate_records(std::span<const ImageRecord> records) {
    if (records.size() > UINT32_MAX) {
        throw Error(ErrorCode::kInvalidParameter, "too many records");
    }
    std::size_t dim = 0;
    for (const ImageRecord& rec : records) {
        if (rec.image_id.size() > UINT16_MAX) {
            throw Error(ErrorCode::kInvalidParameter, "image id longer than 65535 bytes");
        }
        if (rec.entries.size() > UINT16_MAX) {
            throw Error(ErrorCode::kInvalidParameter, "record '" + rec.image_id + "' has too many entries");
        }
        std::set<std::uint16_t> ids;
        for (const PatchEntry& e : rec.entries) {
            if (!ids.insert(e.patch_id).second) {
                throw Error(ErrorCode::kInvalidParameter,
                            "record '" + rec.image_id + "' repeats patch id " + std::to_string(e.patch_id));
            }
            if (!e.region.valid()) {
                throw Error(ErrorCode::kInvalidParameter, "record '" + rec.image_id + "' has an invalid region");
            }
            if (e.descriptor.empty()) {
                throw Error(ErrorCode::kDegenerateInput, "record '" + rec.image_id + "' has an empty descriptor");
            }
            if (dim == 0) {
                dim = e.descriptor.dim();
            } else if (e.descriptor.dim() != dim) {
                throw Error(ErrorCode::kDimensionMismatch,
                            "record '" + rec.image_id + "' has dimension " + std::to_string(e.descriptor.dim()) +
                                ", expected " + std::to_string(dim));
            }
        }
    }
    if (dim > UINT16_MAX) {
        throw Error(ErrorCode::kInvalidParameter, "descriptor dimension exceeds 65535");
    }
    return dim;
}

std::vector<std::uint8_t> encode_embeddings(std::span<const ImageRecord> records) {
    const std::size_t dim = validate_records(records);
    detail::ByteWriter w;
    w.text(kMagic);
    w.u16(kEmbeddingFormatVersion);
    w.u16(static_cast<std::uint16_t>(dim));
    w.u32(static_cast<std::uint32_t>(records.size()));
    for (const ImageRecord& rec : records) {
        w.u16(static_cast<std::uint16_t>(rec.image_id.size()));
        w.text(rec.image_id);
        w.u32(rec.width);
        w.u32(rec.height);
        w.u16(static_cast<std::uint16_t>(rec.entries.size()));
        for (const PatchEntry& e : rec.entries) {
            w.u16(e.patch_id);
            w.f32(e.region.x0);
            w.f32(e.region.y0);
            w.f32(e.region.x1);
            w.f32(e.region.y1);
            for (float v : e.descriptor.values()) w.f32(v);
        }
    }
    return w.finish_with_crc();
}

std::vector<ImageRecord> decode_embeddings(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r = detail::open_envelope(bytes, kMagic, kEmbeddingFormatVersion, kWhat);
    const std::uint16_t dim = r.u16();
    const std::uint32_t count = r.u32();
    std::vector<ImageRecord> records;
    // Each record needs at least 12 bytes, which bounds the reservation.
    records.reserve(std::min<std::size_t>(count, r.remaining() / 12));
    std::vector<float> raw(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        ImageRecord rec;
        const std::uint16_t id_len = r.u16();
        rec.image_id = r.text(id_len);
        rec.width = r.u32();
        rec.height = r.u32();
        const std::uint16_t n_entries = r.u16();
        if (n_entries > 0 && dim == 0) {
            throw Error(ErrorCode::kParseError, "entries present but descriptor dimension is 0", r.offset());
        }
        r.require(static_cast<std::size_t>(n_entries) * (2 + 16 + 4 * static_cast<std::size_t>(dim)));
        rec.entries.reserve(n_entries);
        std::set<std::uint16_t> ids;
        for (std::uint16_t e = 0; e < n_entries; ++e) {
            const std::size_t entry_offset = r.offset();
            PatchEntry entry;
            entry.patch_id = r.u16();
            entry.region.x0 = r.f32();
            entry.region.y0 = r.f32();
            entry.region.x1 = r.f32();
            entry.region.y1 = r.f32();
            for (float& v : raw) v = r.f32();
            if (!ids.insert(entry.patch_id).second) {
                throw Error(ErrorCode::kParseError, "duplicate patch id in record '" + rec.image_id + "'",
                            entry_offset);
            }
            if (!entry.region.valid()) {
                throw Error(ErrorCode::kParseError, "invalid region in record '" + rec.image_id + "'",
                            entry_offset);
            }
            try {
                entry.descriptor = Descriptor::normalize(raw);
            } catch (const Error& err) {
                throw Error(ErrorCode::kParseError, std::string("bad descriptor: ") + err.what(), entry_offset);
            }
            rec.entries.push_back(std::move(entry));
        }
        records.push_back(std::move(rec));
    }
    detail::close_envelope(bytes, r, kWhat);
    return records;
}

void write_embeddings(std::span<const ImageRecord> records, const std::filesystem::path& path) {
    detail::write_file(path, encode_embeddings(records));
}

std::vector<ImageRecord> read_embeddings(const std::filesystem::path& path) {
    return decode_embeddings(detail::read_file(path));
}

std::string format_ground_truth(std::span<const GroundTruthQuery> queries) {
    std::string out;
    for (const GroundTruthQuery& q : queries) {
        nlohmann::ordered_json line;
        line["query_id"] = q.query_id;
        line["descriptor_ref"] = q.descriptor_ref;
        line["positives"] = nlohmann::ordered_json::array();
        for (const GroundTruthPositive& p : q.positives) {
            nlohmann::ordered_json pos;
            pos["image_id"] = p.image_id;
            pos["bbox"] = {p.bbox.x, p.bbox.y, p.bbox.w, p.bbox.h};
            pos["width"] = p.width;
            pos["height"] = p.height;
            line["positives"].push_back(std::move(pos));
        }
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<GroundTruthQuery> parse_ground_truth(std::string_view text) {
    std::vector<GroundTruthQuery> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            try {
                const nlohmann::json j = nlohmann::json::parse(line);
                GroundTruthQuery q;
                q.query_id = j.at("query_id").get<std::string>();
                q.descriptor_ref = j.at("descriptor_ref").get<std::string>();
                std::set<std::string> seen;
                for (const auto& p : j.at("positives")) {
                    GroundTruthPositive pos;
                    pos.image_id = p.at("image_id").get<std::string>();
                    const auto& b = p.at("bbox");
                    if (!b.is_array() || b.size() != 4) {
                        throw Error(ErrorCode::kParseError, "bbox must hold four integers", start);
                    }
                    pos.bbox = {b[0].get<std::int32_t>(), b[1].get<std::int32_t>(), b[2].get<std::int32_t>(),
                                b[3].get<std::int32_t>()};
                    pos.width = p.at("width").get<int>();
                    pos.height = p.at("height").get<int>();
                    if (pos.width < 1 || pos.height < 1) {
                        throw Error(ErrorCode::kParseError, "positive '" + pos.image_id + "' lacks image size",
                                    start);
                    }
                    if (!seen.insert(pos.image_id).second) {
                        throw Error(ErrorCode::kParseError, "positive '" + pos.image_id + "' listed twice", start);
                    }
                    q.positives.push_back(std::move(pos));
                }
                out.push_back(std::move(q));
            } catch (const nlohmann::json::parse_error& err) {
                throw Error(ErrorCode::kParseError, std::string("malformed ground truth line: ") + err.what(),
                            start + (err.byte > 0 ? err.byte - 1 : 0));
            } catch (const nlohmann::json::exception& err) {
                throw Error(ErrorCode::kParseError, std::string("malformed ground truth line: ") + err.what(),
                            start);
            }
        }
        start = end + 1;
    }
    return out;
}

void write_ground_truth(std::span<const GroundTruthQuery> queries, const std::filesystem::path& path) {
    const std::string text = format_ground_truth(queries);
    detail::write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::vector<GroundTruthQuery> read_ground_truth(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = detail::read_file(path);
    return parse_ground_truth({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

}  // namespace patchwise
