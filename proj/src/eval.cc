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

#include "patchwise/eval.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "patchwise/error.h"

namespace patchwise {

namespace {

void check_positives(std::span<const GroundTruthPositive> positives) {
    if (positives.empty()) {
        throw Error(ErrorCode::kInvalidParameter, "query has no positives");
    }
    for (const GroundTruthPositive& p : positives) {
        if (p.width < 1 || p.height < 1) {
            throw Error(ErrorCode::kInvalidParameter, "positive '" + p.image_id + "' lacks image dimensions");
        }
    }
}

double weighted_mean(const std::vector<PositiveMatch>& matches, double (*weight)(const PositiveMatch&, double),
                     double arg) {
    double sum = 0.0;
    for (const PositiveMatch& m : matches) sum += m.precision * weight(m, arg);
    return sum / static_cast<double>(matches.size());
}

double unit_weight(const PositiveMatch&, double) { return 1.0; }
double iou_weight(const PositiveMatch& m, double) { return m.iou; }
double threshold_weight(const PositiveMatch& m, double delta) { return m.iou >= delta ? 1.0 : 0.0; }

void check_delta(double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw Error(ErrorCode::kInvalidParameter, "IoU threshold must lie in (0, 1]");
    }
}

QueryEval evaluate_query(const RankedList& ranked, const GroundTruthQuery& gt, const LocScoreConfig& config,
                         std::span<const GroundTruthPositive> positives, std::span<const std::string> ignored) {
    const std::vector<PositiveMatch> matches = match_positives(ranked, positives, config.k, ignored);
    QueryEval q;
    q.query_id = gt.query_id;
    q.positives = positives.size();
    q.ap = weighted_mean(matches, unit_weight, 0.0);
    q.locscore = weighted_mean(matches, iou_weight, 0.0);
    for (double delta : config.thresholds) q.locscore_at.push_back(weighted_mean(matches, threshold_weight, delta));
    return q;
}

// Pairs ground-truth queries with rankings; a null entry means no ranking.
std::vector<const RankedList*> pair_results(std::span<const RankedList> results,
                                            std::span<const GroundTruthQuery> ground_truth) {
    std::unordered_map<std::string, std::size_t> by_ref;
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < ground_truth.size(); ++i) {
        by_ref.emplace(ground_truth[i].descriptor_ref, i);
        by_id.emplace(ground_truth[i].query_id, i);
    }
    std::vector<const RankedList*> paired(ground_truth.size(), nullptr);
    std::vector<std::string> missing;
    for (const RankedList& r : results) {
        std::size_t slot = 0;
        if (const auto it = by_ref.find(r.query_id); it != by_ref.end()) {
            slot = it->second;
        } else if (const auto alt = by_id.find(r.query_id); alt != by_id.end()) {
            slot = alt->second;
        } else {
            missing.push_back(r.query_id);
            continue;
        }
        if (paired[slot] != nullptr) {
            throw Error(ErrorCode::kInvalidParameter, "query '" + r.query_id + "' has more than one ranking");
        }
        paired[slot] = &r;
    }
    if (!missing.empty()) {
        std::string list;
        for (const std::string& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw Error(ErrorCode::kMissingQuery, "no ground truth for queries: " + list);
    }
    return paired;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void LocScoreConfig::validate() const {
    if (thresholds.empty()) {
        throw Error(ErrorCode::kInvalidParameter, "threshold set is empty");
    }
    for (double t : thresholds) check_delta(t);
}

std::vector<PositiveMatch> match_positives(const RankedList& ranked, std::span<const GroundTruthPositive> positives,
                                           std::size_t k, std::span<const std::string> ignored) {
    check_positives(positives);
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        if (!index.emplace(positives[i].image_id, i).second) {
            throw Error(ErrorCode::kInvalidParameter, "positive '" + positives[i].image_id + "' listed twice");
        }
    }
    const std::set<std::string_view> skip(ignored.begin(), ignored.end());
    std::vector<PositiveMatch> out(positives.size());
    std::size_t rank = 0;
    std::size_t found = 0;
    for (const RankedHit& hit : ranked.hits) {
        if (skip.count(hit.image_id) != 0) continue;
        ++rank;
        if (k != kNoCutoff && rank > k) break;
        const auto it = index.find(hit.image_id);
        if (it == index.end()) continue;
        ++found;
        const GroundTruthPositive& p = positives[it->second];
        out[it->second].precision = static_cast<double>(found) / static_cast<double>(rank);
        out[it->second].iou = iou(p.bbox, to_pixel(hit.best_region, p.width, p.height));
        if (found == positives.size()) break;
    }
    return out;
}

double average_precision(const RankedList& ranked, std::span<const GroundTruthPositive> positives, std::size_t k) {
    return weighted_mean(match_positives(ranked, positives, k), unit_weight, 0.0);
}

double locscore_query(const RankedList& ranked, std::span<const GroundTruthPositive> positives, std::size_t k) {
    return weighted_mean(match_positives(ranked, positives, k), iou_weight, 0.0);
}

double locscore_thresholded(const RankedList& ranked, std::span<const GroundTruthPositive> positives, double delta,
                            std::size_t k) {
    check_delta(delta);
    return weighted_mean(match_positives(ranked, positives, k), threshold_weight, delta);
}

double locscore_mean(std::span<const double> scores) {
    if (scores.empty()) {
        throw Error(ErrorCode::kInvalidParameter, "cannot average zero scores");
    }
    return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double mlocscore(std::span<const double> thresholded_scores) {
    return locscore_mean(thresholded_scores);
}

SliceAxis parse_slice_axis(std::string_view text) {
    if (text == "bbox_ratio") return SliceAxis::kBboxRatio;
    if (text == "center_distance") return SliceAxis::kCenterDistance;
    throw Error(ErrorCode::kInvalidParameter, "unknown slice axis '" + std::string(text) + "'");
}

std::string_view slice_axis_name(SliceAxis axis) noexcept {
    return axis == SliceAxis::kBboxRatio ? "bbox_ratio" : "center_distance";
}

Binning parse_binning(std::string_view text) {
    if (text == "equal_width") return Binning::kEqualWidth;
    if (text == "equal_count") return Binning::kEqualCount;
    throw Error(ErrorCode::kInvalidParameter, "unknown binning '" + std::string(text) + "'");
}

std::string_view binning_name(Binning binning) noexcept {
    return binning == Binning::kEqualWidth ? "equal_width" : "equal_count";
}

double slice_value(SliceAxis axis, const GroundTruthPositive& p) {
    const double w = p.width;
    const double h = p.height;
    if (axis == SliceAxis::kBboxRatio) {
        return static_cast<double>(p.bbox.area()) / (w * h);
    }
    const double cx = p.bbox.x + p.bbox.w / 2.0;
    const double cy = p.bbox.y + p.bbox.h / 2.0;
    return std::hypot(cx - w / 2.0, cy - h / 2.0) / std::hypot(w, h);
}

EvalReport evaluate(std::span<const RankedList> results, std::span<const GroundTruthQuery> ground_truth,
                    const LocScoreConfig& config) {
    config.validate();
    if (ground_truth.empty()) {
        throw Error(ErrorCode::kInvalidParameter, "ground truth holds no queries");
    }
    const std::vector<const RankedList*> paired = pair_results(results, ground_truth);
    EvalReport report;
    report.config = config;
    const RankedList empty;
    std::vector<double> aps;
    std::vector<double> locs;
    std::vector<std::vector<double>> at(config.thresholds.size());
    for (std::size_t i = 0; i < ground_truth.size(); ++i) {
        if (paired[i] == nullptr) {
            report.warnings.push_back("query '" + ground_truth[i].query_id + "' has no ranking; scored as empty");
        }
        const RankedList& ranked = paired[i] != nullptr ? *paired[i] : empty;
        QueryEval q = evaluate_query(ranked, ground_truth[i], config, ground_truth[i].positives, {});
        aps.push_back(q.ap);
        locs.push_back(q.locscore);
        for (std::size_t t = 0; t < at.size(); ++t) at[t].push_back(q.locscore_at[t]);
        report.queries.push_back(std::move(q));
    }
    report.map = locscore_mean(aps);
    report.locscore = locscore_mean(locs);
    for (const auto& scores : at) report.locscore_at.push_back(locscore_mean(scores));
    report.mlocscore = mlocscore(report.locscore_at);
    return report;
}

SliceReport slice_eval(std::span<const RankedList> results, std::span<const GroundTruthQuery> ground_truth,
                       const LocScoreConfig& config, SliceAxis axis, std::size_t bins, Binning binning) {
    config.validate();
    if (bins < 1) {
        throw Error(ErrorCode::kInvalidParameter, "bin count must be at least 1");
    }
    const std::vector<const RankedList*> paired = pair_results(results, ground_truth);

    struct Item {
        double value;
        std::size_t query;
        std::size_t positive;
    };
    std::vector<Item> items;
    for (std::size_t q = 0; q < ground_truth.size(); ++q) {
        check_positives(ground_truth[q].positives);
        for (std::size_t p = 0; p < ground_truth[q].positives.size(); ++p) {
            items.push_back({slice_value(axis, ground_truth[q].positives[p]), q, p});
        }
    }
    if (items.empty()) {
        throw Error(ErrorCode::kInvalidParameter, "ground truth holds no positives");
    }

    SliceReport report;
    report.axis = axis;
    report.binning = binning;
    report.assignment.resize(ground_truth.size());
    for (std::size_t q = 0; q < ground_truth.size(); ++q) report.assignment[q].resize(ground_truth[q].positives.size());

    const auto [min_it, max_it] =
        std::minmax_element(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.value < b.value; });
    const double lo = min_it->value;
    const double hi = max_it->value;
    std::size_t n_bins = bins;
    if (lo == hi) {
        report.warnings.push_back("all " + std::string(slice_axis_name(axis)) + " values are identical; using one bin");
        n_bins = 1;
    }
    report.bins.resize(n_bins);
    if (binning == Binning::kEqualWidth || n_bins == 1) {
        const double width = (hi - lo) / static_cast<double>(n_bins);
        for (std::size_t b = 0; b < n_bins; ++b) {
            report.bins[b].lo = lo + width * static_cast<double>(b);
            report.bins[b].hi = b + 1 == n_bins ? hi : lo + width * static_cast<double>(b + 1);
        }
        for (const Item& it : items) {
            std::size_t b = 0;
            if (n_bins > 1) {
                b = static_cast<std::size_t>(std::floor((it.value - lo) / (hi - lo) * static_cast<double>(n_bins)));
                b = std::min(b, n_bins - 1);
            }
            report.assignment[it.query][it.positive] = b;
        }
    } else {
        std::vector<std::size_t> order(items.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return items[a].value < items[b].value; });
        for (std::size_t i = 0; i < order.size(); ++i) {
            const std::size_t b = std::min(n_bins - 1, i * n_bins / order.size());
            const Item& it = items[order[i]];
            report.assignment[it.query][it.positive] = b;
        }
        for (std::size_t b = 0; b < n_bins; ++b) {
            const std::size_t first = (b * order.size() + n_bins - 1) / n_bins;
            const std::size_t last = ((b + 1) * order.size() + n_bins - 1) / n_bins;
            if (first < last) {
                report.bins[b].lo = items[order[first]].value;
                report.bins[b].hi = items[order[last - 1]].value;
            }
        }
    }

    const RankedList empty;
    for (std::size_t b = 0; b < n_bins; ++b) {
        std::vector<double> aps;
        std::vector<double> locs;
        std::vector<double> mlocs;
        for (std::size_t q = 0; q < ground_truth.size(); ++q) {
            std::vector<GroundTruthPositive> inside;
            std::vector<std::string> outside;
            for (std::size_t p = 0; p < ground_truth[q].positives.size(); ++p) {
                const GroundTruthPositive& pos = ground_truth[q].positives[p];
                if (report.assignment[q][p] == b) {
                    inside.push_back(pos);
                } else {
                    outside.push_back(pos.image_id);
                }
            }
            if (inside.empty()) continue;
            const RankedList& ranked = paired[q] != nullptr ? *paired[q] : empty;
            const QueryEval e = evaluate_query(ranked, ground_truth[q], config, inside, outside);
            aps.push_back(e.ap);
            locs.push_back(e.locscore);
            mlocs.push_back(mlocscore(e.locscore_at));
            report.bins[b].positives += inside.size();
        }
        report.bins[b].queries = aps.size();
        report.bins[b].map = mean_of(aps);
        report.bins[b].locscore = mean_of(locs);
        report.bins[b].mlocscore = mean_of(mlocs);
    }
    return report;
}

std::string report_to_json(const EvalReport& report) {
    using nlohmann::ordered_json;
    const auto delta_key = [](double d) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", d);
        return std::string(buf);
    };
    ordered_json j;
    j["config"]["k"] = report.config.k;
    j["config"]["thresholds"] = report.config.thresholds;
    j["num_queries"] = report.queries.size();
    j["mAP"] = report.map;
    j["LocScore"] = report.locscore;
    ordered_json at = ordered_json::object();
    for (std::size_t t = 0; t < report.locscore_at.size(); ++t) {
        at[delta_key(report.config.thresholds[t])] = report.locscore_at[t];
    }
    j["LocScore_at"] = at;
    j["mLocScore"] = report.mlocscore;
    j["queries"] = ordered_json::array();
    for (const QueryEval& q : report.queries) {
        ordered_json e;
        e["query_id"] = q.query_id;
        e["positives"] = q.positives;
        e["AP"] = q.ap;
        e["LocScore"] = q.locscore;
        ordered_json qa = ordered_json::object();
        for (std::size_t t = 0; t < q.locscore_at.size(); ++t) {
            qa[delta_key(report.config.thresholds[t])] = q.locscore_at[t];
        }
        e["LocScore_at"] = qa;
        j["queries"].push_back(std::move(e));
    }
    if (!report.slices.empty()) {
        j["slices"] = ordered_json::array();
        for (const SliceReport& s : report.slices) {
            ordered_json sj;
            sj["axis"] = slice_axis_name(s.axis);
            sj["binning"] = binning_name(s.binning);
            sj["bins"] = ordered_json::array();
            for (const SliceBin& b : s.bins) {
                sj["bins"].push_back({{"lo", b.lo},
                                      {"hi", b.hi},
                                      {"queries", b.queries},
                                      {"positives", b.positives},
                                      {"mAP", b.map},
                                      {"LocScore", b.locscore},
                                      {"mLocScore", b.mlocscore}});
            }
            if (!s.warnings.empty()) sj["warnings"] = s.warnings;
            j["slices"].push_back(std::move(sj));
        }
    }
    j["warnings"] = report.warnings;
    return j.dump(2);
}

}  // namespace patchwise
