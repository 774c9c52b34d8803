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

#include <json.hpp>
#include <set>

#include "patchwise/error.h"
#include "patchwise/eval.h"
#include "patchwise/rng.h"

using namespace patchwise;

namespace {

RankedHit hit(std::string id, std::uint32_t rank, const PixelBox& box, int w = 100, int h = 100) {
    return {std::move(id), 1.0F - 0.1F * static_cast<float>(rank), 0, to_norm(box, w, h), rank};
}

/// Positives at ranks 1 and 3 whose best patches overlap their boxes with
/// IoU 0.8 and 0.5.
struct Worked {
    RankedList ranked;
    std::vector<GroundTruthPositive> positives;
    Worked() {
        const PixelBox gt{0, 0, 10, 10};
        ranked.query_id = "q";
        ranked.hits = {hit("a", 1, {0, 0, 8, 10}), hit("x", 2, gt), hit("b", 3, {0, 0, 5, 10})};
        positives = {{"a", gt, 100, 100}, {"b", gt, 100, 100}};
    }
};

struct RandomQuery {
    RankedList ranked;
    std::vector<GroundTruthPositive> positives;
};

RandomQuery random_query(Rng& rng) {
    RandomQuery q;
    const auto n_images = static_cast<int>(rng.uniform_int(1, 30));
    std::vector<int> order(n_images);
    for (int i = 0; i < n_images; ++i) order[i] = i;
    for (int i = n_images - 1; i > 0; --i) std::swap(order[i], order[static_cast<int>(rng.uniform_int(0, i))]);
    const auto retrieved = static_cast<int>(rng.uniform_int(0, n_images));
    for (int r = 0; r < retrieved; ++r) {
        const int x = static_cast<int>(rng.uniform_int(0, 60));
        const int y = static_cast<int>(rng.uniform_int(0, 60));
        q.ranked.hits.push_back(hit("i" + std::to_string(order[r]), static_cast<std::uint32_t>(r + 1),
                                    {x, y, static_cast<int>(rng.uniform_int(1, 40)),
                                     static_cast<int>(rng.uniform_int(1, 40))}));
    }
    const auto n_pos = static_cast<int>(rng.uniform_int(1, n_images));
    for (int p = 0; p < n_pos; ++p) {
        const int x = static_cast<int>(rng.uniform_int(0, 60));
        const int y = static_cast<int>(rng.uniform_int(0, 60));
        q.positives.push_back({"i" + std::to_string(p),
                               {x, y, static_cast<int>(rng.uniform_int(1, 40)), static_cast<int>(rng.uniform_int(1, 40))},
                               100,
                               100});
    }
    return q;
}

}  // namespace

TEST_CASE("average precision fixtures") {
    const Worked w;
    CHECK(average_precision(w.ranked, w.positives, 1000) == Catch::Approx(5.0 / 6.0).margin(1e-12));
    CHECK(average_precision(w.ranked, w.positives, kNoCutoff) == Catch::Approx(5.0 / 6.0).margin(1e-12));
    CHECK(average_precision(w.ranked, w.positives, 2) == Catch::Approx(0.5).margin(1e-12));

    RankedList perfect;
    perfect.hits = {hit("a", 1, {0, 0, 10, 10}), hit("b", 2, {0, 0, 10, 10})};
    const std::vector<GroundTruthPositive> both = {{"a", {0, 0, 10, 10}, 100, 100}, {"b", {0, 0, 10, 10}, 100, 100}};
    CHECK(average_precision(perfect, both, 1000) == 1.0);
    CHECK(locscore_query(perfect, both, 1000) == 1.0);

    RankedList second;
    second.hits = {hit("x", 1, {0, 0, 10, 10}), hit("a", 2, {0, 0, 10, 10})};
    CHECK(average_precision(second, std::span(both).first(1), 1000) == 0.5);

    CHECK_THROWS_AS(average_precision(perfect, {}, 1000), Error);
}

TEST_CASE("locscore fixture") {
    const Worked w;
    const auto matches = match_positives(w.ranked, w.positives, 1000);
    REQUIRE(matches.size() == 2);
    CHECK(matches[0].iou == Catch::Approx(0.8).margin(1e-12));
    CHECK(matches[1].iou == Catch::Approx(0.5).margin(1e-12));
    CHECK(locscore_query(w.ranked, w.positives, 1000) == Catch::Approx(0.5666666666666667).margin(1e-9));

    RankedList disjoint;
    disjoint.hits = {hit("a", 1, {50, 50, 10, 10})};
    CHECK(locscore_query(disjoint, std::span(w.positives).first(1), 1000) == 0.0);

    std::vector<GroundTruthPositive> no_dims = w.positives;
    no_dims[0].width = 0;
    CHECK_THROWS_AS(locscore_query(w.ranked, no_dims, 1000), Error);
}

TEST_CASE("thresholded locscore fixtures") {
    const Worked w;
    CHECK(locscore_thresholded(w.ranked, w.positives, 0.4, 1000) == Catch::Approx(5.0 / 6.0).margin(1e-12));
    CHECK(locscore_thresholded(w.ranked, w.positives, 0.5, 1000) == Catch::Approx(5.0 / 6.0).margin(1e-12));
    CHECK(locscore_thresholded(w.ranked, w.positives, 0.51, 1000) == Catch::Approx(0.5).margin(1e-12));
    CHECK(locscore_thresholded(w.ranked, w.positives, 0.9, 1000) == 0.0);
    CHECK_THROWS_AS(locscore_thresholded(w.ranked, w.positives, 0.0, 1000), Error);
    CHECK_THROWS_AS(locscore_thresholded(w.ranked, w.positives, 1.5, 1000), Error);
}

TEST_CASE("ignored images are removed before ranking") {
    const Worked w;
    const std::vector<std::string> ignored = {"x"};
    const auto matches = match_positives(w.ranked, w.positives, 1000, ignored);
    CHECK(matches[1].precision == 1.0);
}

TEST_CASE("aggregate fixtures") {
    const std::vector<double> one = {0.7};
    CHECK(locscore_mean(one) == 0.7);
    const std::vector<double> two = {0.2, 0.4};
    CHECK(locscore_mean(two) == Catch::Approx(0.3).margin(1e-15));
    CHECK_THROWS_AS(locscore_mean({}), Error);
    const std::vector<double> thresholded = {0.6, 0.5, 0.4};
    CHECK(mlocscore(thresholded) == Catch::Approx(0.5).margin(1e-15));
    const std::vector<double> reported = {20.151, 9.777, 4.264};
    CHECK(mlocscore(reported) == Catch::Approx(11.397).margin(1e-3));

    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> scores(static_cast<std::size_t>(rng.uniform_int(1, 50)));
        for (double& s : scores) s = rng.uniform();
        long double sum = 0.0L;
        for (double s : scores) sum += s;
        CHECK(locscore_mean(scores) == Catch::Approx(static_cast<double>(sum / scores.size())).margin(1e-12));
    }
}

TEST_CASE("metric ordering properties") {
    Rng rng(2);
    const std::vector<double> deltas = {0.3, 0.4, 0.5};
    for (int t = 0; t < 2000; ++t) {
        const RandomQuery q = random_query(rng);
        const std::size_t k = rng.uniform() < 0.5 ? kNoCutoff : static_cast<std::size_t>(rng.uniform_int(1, 30));
        const double ap = average_precision(q.ranked, q.positives, k);
        const double ls = locscore_query(q.ranked, q.positives, k);
        CHECK(ap >= 0.0);
        CHECK(ap <= 1.0);
        CHECK(ls >= 0.0);
        CHECK(ls <= ap);
        double prev = 2.0;
        std::vector<double> grid = {rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0), 0.3, 0.4, 0.5, 1.0};
        std::sort(grid.begin(), grid.end());
        for (double d : grid) {
            const double v = locscore_thresholded(q.ranked, q.positives, d, k);
            CHECK(v <= prev);
            CHECK(v <= ap);
            prev = v;
        }
        std::vector<double> at;
        for (double d : deltas) at.push_back(locscore_thresholded(q.ranked, q.positives, d, k));
        CHECK(mlocscore(at) == (at[0] + at[1] + at[2]) / 3.0);
    }
}

TEST_CASE("binary IoUs make every threshold agree with the continuous score") {
    RankedList ranked;
    ranked.hits = {hit("a", 1, {0, 0, 10, 10}), hit("b", 2, {50, 50, 10, 10}), hit("c", 3, {0, 0, 10, 10})};
    const std::vector<GroundTruthPositive> pos = {
        {"a", {0, 0, 10, 10}, 100, 100}, {"b", {0, 0, 10, 10}, 100, 100}, {"c", {0, 0, 10, 10}, 100, 100}};
    const double ls = locscore_query(ranked, pos, 1000);
    for (double d : {0.01, 0.3, 0.77, 1.0}) CHECK(locscore_thresholded(ranked, pos, d, 1000) == ls);
}

TEST_CASE("evaluate pairs rankings with ground truth") {
    const Worked w;
    RankedList r = w.ranked;
    r.query_id = "desc0";
    std::vector<GroundTruthQuery> gt(2);
    gt[0] = {"q0", "desc0", w.positives};
    gt[1] = {"q1", "q1", w.positives};
    const std::vector<RankedList> results = {r};
    const EvalReport rep = evaluate(results, gt, {});
    REQUIRE(rep.queries.size() == 2);
    CHECK(rep.queries[0].ap == Catch::Approx(5.0 / 6.0));
    CHECK(rep.queries[1].ap == 0.0);
    CHECK(rep.map == Catch::Approx(5.0 / 12.0));
    CHECK(rep.locscore == Catch::Approx(0.5666666666666667 / 2.0));
    CHECK(rep.warnings.size() == 1);
    REQUIRE(rep.locscore_at.size() == 3);
    CHECK(rep.mlocscore == Catch::Approx((rep.locscore_at[0] + rep.locscore_at[1] + rep.locscore_at[2]) / 3.0));

    RankedList stray = r;
    stray.query_id = "nobody";
    const std::vector<RankedList> bad = {r, stray};
    try {
        evaluate(bad, gt, {});
        FAIL("stray ranking accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kMissingQuery);
        CHECK(std::string(e.what()).find("nobody") != std::string::npos);
    }
    CHECK(evaluate(results, gt, {}).map == rep.map);
}

TEST_CASE("report json") {
    const Worked w;
    RankedList r = w.ranked;
    r.query_id = "q0";
    const std::vector<GroundTruthQuery> gt = {{"q0", "q0", w.positives}};
    const std::vector<RankedList> results = {r};
    EvalReport rep = evaluate(results, gt, {});
    rep.slices.push_back(slice_eval(results, gt, {}, SliceAxis::kBboxRatio, 3));
    const auto j = nlohmann::json::parse(report_to_json(rep));
    CHECK(j["num_queries"] == 1);
    CHECK(j["mAP"].get<double>() == Catch::Approx(5.0 / 6.0));
    CHECK(j["LocScore"].get<double>() == Catch::Approx(0.5666666666666667));
    CHECK(j["LocScore_at"]["0.3"].get<double>() == Catch::Approx(5.0 / 6.0));
    CHECK(j.contains("mLocScore"));
    CHECK(j["queries"].size() == 1);
    CHECK(j["slices"].size() == 1);
    CHECK(j.contains("warnings"));
}

TEST_CASE("slice values") {
    CHECK(slice_value(SliceAxis::kBboxRatio, {"a", {0, 0, 100, 50}, 100, 100}) == 0.5);
    CHECK(slice_value(SliceAxis::kCenterDistance, {"a", {25, 25, 50, 50}, 100, 100}) == 0.0);
    CHECK(slice_value(SliceAxis::kCenterDistance, {"a", {0, 0, 0, 0}, 100, 100}) ==
          Catch::Approx(0.5));
}

TEST_CASE("slices partition the positives") {
    Rng rng(3);
    std::vector<GroundTruthQuery> gt;
    std::vector<RankedList> results;
    for (int qi = 0; qi < 40; ++qi) {
        RandomQuery q = random_query(rng);
        q.ranked.query_id = "q" + std::to_string(qi);
        gt.push_back({q.ranked.query_id, q.ranked.query_id, q.positives});
        results.push_back(q.ranked);
    }
    for (auto axis : {SliceAxis::kBboxRatio, SliceAxis::kCenterDistance}) {
        for (auto binning : {Binning::kEqualWidth, Binning::kEqualCount}) {
            const SliceReport rep = slice_eval(results, gt, {}, axis, 5, binning);
            REQUIRE(rep.bins.size() == 5);
            REQUIRE(rep.assignment.size() == gt.size());
            std::size_t pooled = 0;
            std::size_t total = 0;
            std::set<std::pair<std::size_t, std::size_t>> seen;
            for (std::size_t b = 0; b < rep.bins.size(); ++b) {
                pooled += rep.bins[b].positives;
                for (std::size_t q = 0; q < gt.size(); ++q) {
                    for (std::size_t p = 0; p < rep.assignment[q].size(); ++p) {
                        if (rep.assignment[q][p] == b) CHECK(seen.emplace(q, p).second);
                    }
                }
            }
            for (const auto& q : gt) total += q.positives.size();
            CHECK(pooled == total);
            CHECK(seen.size() == total);
            for (std::size_t q = 0; q < gt.size(); ++q) {
                for (std::size_t p = 0; p < gt[q].positives.size(); ++p) {
                    const std::size_t b = rep.assignment[q][p];
                    const double v = slice_value(axis, gt[q].positives[p]);
                    CHECK(v >= rep.bins[b].lo - 1e-12);
                    CHECK(v <= rep.bins[b].hi + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("slice fixtures") {
    const Worked w;
    RankedList r = w.ranked;
    r.query_id = "q0";
    const std::vector<RankedList> results = {r};

    std::vector<GroundTruthQuery> full = {{"q0", "q0", {{"a", {0, 0, 100, 100}, 100, 100}, {"b", {0, 0, 40, 40}, 100, 100}}}};
    const SliceReport rep = slice_eval(results, full, {}, SliceAxis::kBboxRatio, 5);
    CHECK(rep.assignment[0][0] == 4);
    CHECK(rep.assignment[0][1] == 0);
    CHECK(rep.bins[4].queries == 1);
    CHECK(rep.bins[2].queries == 0);
    // within the top bin "b" is ignored, so "a" keeps rank 1
    CHECK(rep.bins[4].map == 1.0);

    std::vector<GroundTruthQuery> same = {{"q0", "q0", {{"a", {0, 0, 10, 10}, 100, 100}, {"b", {0, 0, 10, 10}, 100, 100}}}};
    const SliceReport single = slice_eval(results, same, {}, SliceAxis::kBboxRatio, 5);
    CHECK(single.bins.size() == 1);
    CHECK(single.warnings.size() == 1);
    CHECK(single.bins[0].map == Catch::Approx(5.0 / 6.0));

    std::vector<GroundTruthQuery> centred = {{"q0", "q0", {{"a", {25, 25, 50, 50}, 100, 100}, {"b", {0, 0, 10, 10}, 100, 100}}}};
    CHECK(slice_eval(results, centred, {}, SliceAxis::kCenterDistance, 5).assignment[0][0] == 0);
    CHECK_THROWS_AS(slice_eval(results, same, {}, SliceAxis::kBboxRatio, 0), Error);
}

TEST_CASE("config and name parsing") {
    LocScoreConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.thresholds = {};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.thresholds = {0.0};
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK(parse_slice_axis("bbox_ratio") == SliceAxis::kBboxRatio);
    CHECK(slice_axis_name(parse_slice_axis("center_distance")) == "center_distance");
    CHECK(parse_binning("equal_count") == Binning::kEqualCount);
    CHECK(binning_name(Binning::kEqualWidth) == "equal_width");
    CHECK_THROWS_AS(parse_slice_axis("nope"), Error);
}
