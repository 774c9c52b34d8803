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

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "patchwise/error.h"
#include "patchwise/eval.h"
#include "patchwise/index_io.h"
#include "patchwise/pipeline.h"

namespace fs = std::filesystem;
using namespace patchwise;

namespace {

struct Options {
    std::string level = "l3";
    std::string strategy = "grid";
    double stride = 0.5;
    std::size_t max_regions = kDefaultMaxRegions;
    int dim = 64;
    std::uint64_t seed = 0;
    int n_images = 100;
    int image_size = 128;
    int positives = 1;
    double target_min = 0.30;
    double target_max = 0.316;
    double center_offset = 0.0;
    std::uint64_t synth_seed = 0;
    bool gt_crops = false;
    std::string kind = "flat";
    std::string pq = "16,64,8";
    std::string pool = "l3";
    std::size_t nprobe = 8;
    std::optional<std::size_t> k;
    std::vector<double> thresholds{0.3, 0.4, 0.5};
    std::vector<std::string> slices;
    std::size_t bins = 5;
    std::string binning = "equal_width";
};

PipelineConfig to_config(const Options& o) {
    PipelineConfig c;
    c.level = parse_level(o.level);
    c.strategy = parse_strategy(o.strategy);
    c.stride = o.stride;
    c.max_regions = o.max_regions;
    c.dim = o.dim;
    c.seed = o.seed;
    c.synth.n_images = o.n_images;
    c.synth.image_size = o.image_size;
    c.synth.n_positives = o.positives;
    c.synth.target_min = o.target_min;
    c.synth.target_max = o.target_max;
    c.synth.min_center_offset = o.center_offset;
    c.synth.seed = o.synth_seed;
    c.gt_crops = o.gt_crops;
    c.kind = parse_index_kind(o.kind);
    c.pq = parse_pq_params(o.pq);
    c.pq.nprobe = o.nprobe;
    c.pool = parse_pool_strategy(o.pool);
    c.eval.thresholds = o.thresholds;
    if (o.k) {
        c.top_k = *o.k;
        c.eval.k = *o.k;
    }
    c.validate();
    return c;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
}

void warn(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) {
        nlohmann::ordered_json j;
        j["warning"] = w;
        std::cerr << j.dump() << '\n';
    }
}

int fail(std::string_view code, const std::string& message, std::optional<std::uint64_t> offset = std::nullopt) {
    nlohmann::ordered_json j;
    j["error"] = code;
    j["message"] = message;
    j["offset"] = offset ? nlohmann::ordered_json(*offset) : nlohmann::ordered_json(nullptr);
    std::cerr << j.dump() << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Patch-level image retrieval: synthetic corpora, flat and IVFPQ indexes, localization metrics"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");

    Options o;
    app.add_option("--level", o.level, "Patch level: l0, l1, l2 or l3")->capture_default_str();
    app.add_option("--strategy", o.strategy, "Patch strategy: grid, sliding or external")->capture_default_str();
    app.add_option("--stride", o.stride, "Sliding-window stride as a fraction of the window")->capture_default_str();
    app.add_option("--max-regions", o.max_regions, "Boxes per image for the external strategy")->capture_default_str();
    app.add_option("--dim", o.dim, "Descriptor dimension")->capture_default_str();
    app.add_option("--seed", o.seed, "Seed for embedding projections, boxes and codebook training")->capture_default_str();
    app.add_option("--n-images", o.n_images, "Synthetic database size")->capture_default_str();
    app.add_option("--image-size", o.image_size, "Synthetic image side in pixels")->capture_default_str();
    app.add_option("--positives", o.positives, "Images that receive the planted target")->capture_default_str();
    app.add_option("--target-min", o.target_min, "Smallest target side as a fraction of the image side")
        ->capture_default_str();
    app.add_option("--target-max", o.target_max, "Largest target side as a fraction of the image side")
        ->capture_default_str();
    app.add_option("--center-offset", o.center_offset, "Minimum target distance from the image centre")
        ->capture_default_str();
    app.add_option("--synth-seed", o.synth_seed, "Seed for the synthetic images")->capture_default_str();
    app.add_flag("--gt-crops", o.gt_crops, "Store a descriptor of every planted box");
    app.add_option("--kind", o.kind, "Index kind: flat or ivfpq")->capture_default_str();
    app.add_option("--pq", o.pq, "Product quantizer as m,nlist,nbits")->capture_default_str();
    app.add_option("--pq-train-pool", o.pool, "Codebook training pool: l0, l1, l2, l3 or gt")->capture_default_str();
    app.add_option("--nprobe", o.nprobe, "Inverted lists probed per query")->capture_default_str();
    app.add_option("--k", o.k, "Results per query (search, default 100) or ranking cutoff (eval, default 1000)");
    app.add_option("--thresholds", o.thresholds, "IoU thresholds for LocScore")->delimiter(',')->capture_default_str();
    app.add_option("--slice", o.slices, "Slice axes for eval: bbox_ratio, center_distance")->delimiter(',');
    app.add_option("--bins", o.bins, "Bins per slice axis")->capture_default_str();
    app.add_option("--binning", o.binning, "equal_width or equal_count")->capture_default_str();

    std::string out_path;
    std::string embeddings_path;
    std::string gt_path;
    std::string index_path;
    std::string queries_path;
    std::string results_path;

    auto* synth = app.add_subcommand("synth", "Generate and embed a synthetic corpus");
    synth->add_option("--out", out_path, "Output directory")->required();

    auto* build = app.add_subcommand("build", "Build an index from an embedding file");
    build->add_option("--embeddings", embeddings_path, "Embedding file")->required();
    build->add_option("--ground-truth", gt_path, "Ground truth, needed for --pq-train-pool gt");
    build->add_option("--out", out_path, "Index file")->required();

    auto* search = app.add_subcommand("search", "Rank database images for every query record");
    search->add_option("--index", index_path, "Index file")->required();
    search->add_option("--queries", queries_path, "Embedding file holding the query records")->required();
    search->add_option("--out", out_path, "Results file (JSON lines); stdout when omitted");

    auto* eval = app.add_subcommand("eval", "Score rankings against ground truth");
    eval->add_option("--results", results_path, "Results file (JSON lines)")->required();
    eval->add_option("--ground-truth", gt_path, "Ground truth file")->required();
    eval->add_option("--out", out_path, "Report file; stdout when omitted");

    auto* stats = app.add_subcommand("stats", "Report storage and compression of an index");
    stats->add_option("--index", index_path, "Index file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("invalid_parameter", e.what());
    }

    try {
        const PipelineConfig config = to_config(o);
        if (synth->parsed()) {
            const SynthCorpus corpus = run_synth(config, out_path);
            nlohmann::ordered_json j;
            j["images"] = corpus.database.size();
            j["entries_per_image"] = corpus.database.empty() ? 0 : corpus.database[0].entries.size();
            j["queries"] = corpus.queries.size();
            std::cerr << j.dump() << '\n';
        } else if (build->parsed()) {
            const auto records = read_embeddings(embeddings_path);
            std::vector<GroundTruthQuery> gt;
            if (!gt_path.empty()) gt = read_ground_truth(gt_path);
            BuildSummary summary;
            const Index index = build_index(records, config, gt, &summary);
            write_index(index, out_path);
            warn(summary.warnings);
            nlohmann::ordered_json j;
            j["kind"] = index_kind_name(summary.kind);
            j["images"] = summary.images;
            j["rows"] = summary.rows;
            if (summary.kind == IndexKind::kIvfPq) j["pool_size"] = summary.pool_size;
            std::cerr << j.dump() << '\n';
        } else if (search->parsed()) {
            const Index index = read_index(index_path);
            const auto queries = read_embeddings(queries_path);
            write_text(format_results(search_index(index, queries, config.top_k, config.pq.nprobe)), out_path);
        } else if (eval->parsed()) {
            const auto results = parse_results(read_text(results_path));
            const auto gt = read_ground_truth(gt_path);
            EvalReport report = evaluate(results, gt, config.eval);
            for (const auto& axis : o.slices) {
                report.slices.push_back(
                    slice_eval(results, gt, config.eval, parse_slice_axis(axis), o.bins, parse_binning(o.binning)));
            }
            warn(report.warnings);
            write_text(report_to_json(report) + "\n", out_path);
        } else if (stats->parsed()) {
            const Index index = read_index(index_path);
            const IndexKind kind = std::holds_alternative<FlatIndex>(index) ? IndexKind::kFlat : IndexKind::kIvfPq;
            std::cout << stats_to_json(index_stats(index), kind) << '\n';
        }
    } catch (const Error& e) {
        return fail(error_code_name(e.code()), e.what(), e.offset());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
