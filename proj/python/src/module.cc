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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "patchwise/error.h"
#include "patchwise/eval.h"
#include "patchwise/geometry.h"
#include "patchwise/index_io.h"
#include "patchwise/pipeline.h"

namespace py = pybind11;
using namespace patchwise;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Descriptor to_descriptor(const FloatArray& values) {
    if (values.ndim() != 1) throw Error(ErrorCode::kInvalidParameter, "descriptor must be one-dimensional");
    return Descriptor::normalize({values.data(), static_cast<std::size_t>(values.size())});
}

py::array_t<float> to_array(const Descriptor& d) {
    return py::array_t<float>(static_cast<py::ssize_t>(d.dim()), d.values().data());
}

PipelineConfig make_config(const std::string& level, const std::string& strategy, double stride, int dim,
                           std::uint64_t seed) {
    PipelineConfig c;
    c.level = parse_level(level);
    c.strategy = parse_strategy(strategy);
    c.stride = stride;
    c.dim = dim;
    c.seed = seed;
    return c;
}

class PyIndex {
public:
    explicit PyIndex(Index index) : index_(std::move(index)) {}

    static PyIndex build(const std::vector<ImageRecord>& records, const std::string& kind, const std::string& pq,
                         const std::string& pool, std::uint64_t seed, const std::vector<GroundTruthQuery>& gt) {
        PipelineConfig c;
        c.kind = parse_index_kind(kind);
        c.pq = parse_pq_params(pq);
        c.pool = parse_pool_strategy(pool);
        c.seed = seed;
        if (!records.empty() && !records.front().entries.empty()) {
            c.dim = static_cast<int>(records.front().entries.front().descriptor.dim());
        }
        return PyIndex(build_index(records, c, gt));
    }

    RankedList search(const FloatArray& query, std::size_t k, std::size_t nprobe, const std::string& query_id) const {
        const Descriptor d = to_descriptor(query);
        if (const auto* flat = std::get_if<FlatIndex>(&index_)) return flat->search(d, k, query_id);
        return std::get<IvfPqIndex>(index_).search(d, k, nprobe, query_id);
    }

    std::string kind() const {
        return std::string(index_kind_name(std::holds_alternative<FlatIndex>(index_) ? IndexKind::kFlat
                                                                                      : IndexKind::kIvfPq));
    }
    std::size_t dim() const { return index_dim(index_); }
    CompressionStats stats() const { return index_stats(index_); }
    py::bytes to_bytes() const {
        const auto b = encode_index(index_);
        return {reinterpret_cast<const char*>(b.data()), b.size()};
    }
    void save(const std::filesystem::path& path) const { write_index(index_, path); }

private:
    Index index_;
};

}  // namespace

PYBIND11_MODULE(_patchwise, m) {
    m.doc() = "Patch-level image retrieval with flat and IVFPQ indexes and localization-aware metrics";

    static py::exception<Error> error_type(m, "PatchwiseError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(error_type)(std::string(e.what()));
            err.attr("code") = std::string(error_code_name(e.code()));
            err.attr("offset") = e.offset() ? py::cast(*e.offset()) : py::none();
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    py::class_<NormRect>(m, "NormRect")
        .def(py::init<float, float, float, float>(), py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"))
        .def_readwrite("x0", &NormRect::x0)
        .def_readwrite("y0", &NormRect::y0)
        .def_readwrite("x1", &NormRect::x1)
        .def_readwrite("y1", &NormRect::y1)
        .def("valid", &NormRect::valid)
        .def("__eq__", [](const NormRect& a, const NormRect& b) { return a == b; })
        .def("__iter__", [](const NormRect& r) { return py::iter(py::make_tuple(r.x0, r.y0, r.x1, r.y1)); })
        .def("__repr__", [](const NormRect& r) {
            return "NormRect(" + std::to_string(r.x0) + ", " + std::to_string(r.y0) + ", " + std::to_string(r.x1) +
                   ", " + std::to_string(r.y1) + ")";
        });

    py::class_<PixelBox>(m, "PixelBox")
        .def(py::init<std::int32_t, std::int32_t, std::int32_t, std::int32_t>(), py::arg("x"), py::arg("y"),
             py::arg("w"), py::arg("h"))
        .def_readwrite("x", &PixelBox::x)
        .def_readwrite("y", &PixelBox::y)
        .def_readwrite("w", &PixelBox::w)
        .def_readwrite("h", &PixelBox::h)
        .def("__eq__", [](const PixelBox& a, const PixelBox& b) { return a == b; })
        .def("__iter__", [](const PixelBox& b) { return py::iter(py::make_tuple(b.x, b.y, b.w, b.h)); })
        .def("__repr__", [](const PixelBox& b) {
            return "PixelBox(" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " + std::to_string(b.w) +
                   ", " + std::to_string(b.h) + ")";
        });

    m.def("grid_patches", [](const std::string& level) { return grid_patches(parse_level(level)).patches; },
          py::arg("level"));
    m.def("sliding_windows",
          [](const std::string& level, double stride) { return sliding_windows(parse_level(level), stride).patches; },
          py::arg("level"), py::arg("stride"));
    m.def("to_pixel", &to_pixel, py::arg("region"), py::arg("width"), py::arg("height"));
    m.def("to_norm", &to_norm, py::arg("box"), py::arg("width"), py::arg("height"));
    m.def("iou", &iou, py::arg("a"), py::arg("b"));
    m.def("normalize", [](const FloatArray& v) { return to_array(to_descriptor(v)); }, py::arg("values"));

    py::class_<Patch>(m, "Patch")
        .def_readonly("id", &Patch::id)
        .def_readonly("region", &Patch::region);

    py::class_<PatchEntry>(m, "PatchEntry")
        .def(py::init([](std::uint16_t id, const NormRect& region, const FloatArray& descriptor) {
                 return PatchEntry{id, region, to_descriptor(descriptor)};
             }),
             py::arg("patch_id"), py::arg("region"), py::arg("descriptor"))
        .def_readwrite("patch_id", &PatchEntry::patch_id)
        .def_readwrite("region", &PatchEntry::region)
        .def_property(
            "descriptor", [](const PatchEntry& e) { return to_array(e.descriptor); },
            [](PatchEntry& e, const FloatArray& v) { e.descriptor = to_descriptor(v); });

    py::class_<ImageRecord>(m, "ImageRecord")
        .def(py::init([](std::string id, std::uint32_t w, std::uint32_t h, std::vector<PatchEntry> entries) {
                 return ImageRecord{std::move(id), w, h, std::move(entries)};
             }),
             py::arg("image_id"), py::arg("width"), py::arg("height"), py::arg("entries") = std::vector<PatchEntry>{})
        .def_readwrite("image_id", &ImageRecord::image_id)
        .def_readwrite("width", &ImageRecord::width)
        .def_readwrite("height", &ImageRecord::height)
        .def_readwrite("entries", &ImageRecord::entries)
        .def("__eq__", [](const ImageRecord& a, const ImageRecord& b) { return a == b; });

    py::class_<GroundTruthPositive>(m, "GroundTruthPositive")
        .def(py::init([](std::string id, const PixelBox& box, int w, int h) {
                 return GroundTruthPositive{std::move(id), box, w, h};
             }),
             py::arg("image_id"), py::arg("bbox"), py::arg("width"), py::arg("height"))
        .def_readwrite("image_id", &GroundTruthPositive::image_id)
        .def_readwrite("bbox", &GroundTruthPositive::bbox)
        .def_readwrite("width", &GroundTruthPositive::width)
        .def_readwrite("height", &GroundTruthPositive::height);

    py::class_<GroundTruthQuery>(m, "GroundTruthQuery")
        .def(py::init([](std::string id, std::string ref, std::vector<GroundTruthPositive> positives) {
                 return GroundTruthQuery{std::move(id), std::move(ref), std::move(positives)};
             }),
             py::arg("query_id"), py::arg("descriptor_ref"), py::arg("positives"))
        .def_readwrite("query_id", &GroundTruthQuery::query_id)
        .def_readwrite("descriptor_ref", &GroundTruthQuery::descriptor_ref)
        .def_readwrite("positives", &GroundTruthQuery::positives);

    py::class_<RankedHit>(m, "RankedHit")
        .def_readonly("image_id", &RankedHit::image_id)
        .def_readonly("score", &RankedHit::score)
        .def_readonly("rank", &RankedHit::rank)
        .def_readonly("best_patch_id", &RankedHit::best_patch_id)
        .def_readonly("best_region", &RankedHit::best_region);

    py::class_<RankedList>(m, "RankedList")
        .def(py::init<>())
        .def_readwrite("query_id", &RankedList::query_id)
        .def_readwrite("hits", &RankedList::hits)
        .def("__eq__", [](const RankedList& a, const RankedList& b) { return a == b; });

    py::class_<CompressionStats>(m, "CompressionStats")
        .def_readonly("vectors", &CompressionStats::vectors)
        .def_readonly("raw_bytes", &CompressionStats::raw_bytes)
        .def_readonly("code_bytes", &CompressionStats::code_bytes)
        .def_readonly("compressed_bytes", &CompressionStats::compressed_bytes)
        .def_readonly("compression_ratio", &CompressionStats::compression_ratio);

    m.def("encode_embeddings", [](const std::vector<ImageRecord>& records) {
        const auto b = encode_embeddings(records);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
    });
    m.def("decode_embeddings", [](const py::bytes& data) {
        const std::string_view s = data;
        return decode_embeddings({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
    });
    m.def("read_embeddings", &read_embeddings, py::arg("path"));
    m.def("write_embeddings",
          [](const std::vector<ImageRecord>& records, const std::filesystem::path& path) {
              write_embeddings(records, path);
          },
          py::arg("records"), py::arg("path"));
    m.def("read_ground_truth", &read_ground_truth, py::arg("path"));
    m.def("parse_ground_truth", &parse_ground_truth, py::arg("text"));
    m.def("format_ground_truth",
          [](const std::vector<GroundTruthQuery>& gt) { return format_ground_truth(gt); });

    m.def(
        "synth",
        [](int n_images, int image_size, int positives, const std::string& level, const std::string& strategy,
           double stride, int dim, std::uint64_t seed, std::uint64_t synth_seed, bool gt_crops) {
            PipelineConfig c = make_config(level, strategy, stride, dim, seed);
            c.synth.n_images = n_images;
            c.synth.image_size = image_size;
            c.synth.n_positives = positives;
            c.synth.seed = synth_seed;
            c.gt_crops = gt_crops;
            SynthCorpus corpus = make_synth_corpus(c);
            return py::make_tuple(std::move(corpus.database), std::move(corpus.queries),
                                  std::move(corpus.ground_truth));
        },
        py::arg("n_images") = 100, py::arg("image_size") = 128, py::arg("positives") = 1, py::arg("level") = "l3",
        py::arg("strategy") = "grid", py::arg("stride") = 0.5, py::arg("dim") = 64, py::arg("seed") = 0,
        py::arg("synth_seed") = 0, py::arg("gt_crops") = false);

    py::class_<PyIndex>(m, "Index")
        .def_static("build", &PyIndex::build, py::arg("records"), py::arg("kind") = "flat",
                    py::arg("pq") = "16,64,8", py::arg("pool") = "l3", py::arg("seed") = 0,
                    py::arg("ground_truth") = std::vector<GroundTruthQuery>{})
        .def_static("load", [](const std::filesystem::path& path) { return PyIndex(read_index(path)); },
                    py::arg("path"))
        .def_static("from_bytes",
                    [](const py::bytes& data) {
                        const std::string_view s = data;
                        return PyIndex(decode_index({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}));
                    })
        .def("search", &PyIndex::search, py::arg("query"), py::arg("k") = 100, py::arg("nprobe") = 8,
             py::arg("query_id") = "")
        .def("save", &PyIndex::save, py::arg("path"))
        .def("to_bytes", &PyIndex::to_bytes)
        .def("stats", &PyIndex::stats)
        .def_property_readonly("kind", &PyIndex::kind)
        .def_property_readonly("dim", &PyIndex::dim);

    m.def("format_results", [](const std::vector<RankedList>& results) { return format_results(results); });
    m.def("parse_results", &parse_results, py::arg("text"));

    m.def(
        "evaluate_json",
        [](const std::vector<RankedList>& results, const std::vector<GroundTruthQuery>& gt,
           const std::vector<double>& thresholds, std::size_t k) {
            LocScoreConfig cfg;
            cfg.thresholds = thresholds;
            cfg.k = k;
            return report_to_json(evaluate(results, gt, cfg));
        },
        py::arg("results"), py::arg("ground_truth"), py::arg("thresholds") = std::vector<double>{0.3, 0.4, 0.5},
        py::arg("k") = 1000);
    m.def("average_precision", &average_precision, py::arg("ranked"), py::arg("positives"), py::arg("k") = 1000);
    m.def("locscore", &locscore_query, py::arg("ranked"), py::arg("positives"), py::arg("k") = 1000);
    m.def("locscore_thresholded", &locscore_thresholded, py::arg("ranked"), py::arg("positives"),
          py::arg("delta"), py::arg("k") = 1000);
    m.def("mlocscore", [](const std::vector<double>& scores) { return mlocscore(scores); }, py::arg("scores"));
}
