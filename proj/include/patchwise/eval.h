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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchwise/embedding_io.h"
#include "patchwise/ranking.h"

namespace patchwise {

/// Ranking cutoff meaning "no cutoff".
inline constexpr std::size_t kNoCutoff = 0;

struct LocScoreConfig {
    std::vector<double> thresholds{0.3, 0.4, 0.5};
    std::size_t k = 1000;

    void validate() const;
};

/// Per-positive outcome: precision h/r at the positive's rank (0 when not
/// retrieved within the cutoff) and IoU of its best patch with the box.
struct PositiveMatch {
    double precision = 0.0;
    double iou = 0.0;
};

/// Walks the ranking once. Hits whose image is listed in ignored are removed
/// before ranks are assigned.
std::vector<PositiveMatch> match_positives(const RankedList& ranked, std::span<const GroundTruthPositive> positives,
                                           std::size_t k, std::span<const std::string> ignored = {});

double average_precision(const RankedList& ranked, std::span<const GroundTruthPositive> positives, std::size_t k);
double locscore_query(const RankedList& ranked, std::span<const GroundTruthPositive> positives, std::size_t k);
double locscore_thresholded(const RankedList& ranked, std::span<const GroundTruthPositive> positives, double delta,
                            std::size_t k);

/// Arithmetic mean; throws on an empty input.
double locscore_mean(std::span<const double> scores);

/// Mean of LocScore(delta) over the threshold set.
double mlocscore(std::span<const double> thresholded_scores);

struct QueryEval {
    std::string query_id;
    std::size_t positives = 0;
    double ap = 0.0;
    double locscore = 0.0;
    std::vector<double> locscore_at;
};

enum class SliceAxis : std::uint8_t { kBboxRatio, kCenterDistance };
enum class Binning : std::uint8_t { kEqualWidth, kEqualCount };

SliceAxis parse_slice_axis(std::string_view text);
std::string_view slice_axis_name(SliceAxis axis) noexcept;
Binning parse_binning(std::string_view text);
std::string_view binning_name(Binning binning) noexcept;

/// Box area over image area, or centre offset over image diagonal.
double slice_value(SliceAxis axis, const GroundTruthPositive& positive);

struct SliceBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t queries = 0;
    std::size_t positives = 0;
    double map = 0.0;
    double locscore = 0.0;
    double mlocscore = 0.0;
};

struct SliceReport {
    SliceAxis axis = SliceAxis::kBboxRatio;
    Binning binning = Binning::kEqualWidth;
    std::vector<SliceBin> bins;
    /// bin index of every positive, per query.
    std::vector<std::vector<std::size_t>> assignment;
    std::vector<std::string> warnings;
};

struct EvalReport {
    LocScoreConfig config;
    std::vector<QueryEval> queries;
    double map = 0.0;
    double locscore = 0.0;
    std::vector<double> locscore_at;
    double mlocscore = 0.0;
    std::vector<SliceReport> slices;
    std::vector<std::string> warnings;
};

/// Pairs each ground-truth query with the ranking whose query id equals its
/// descriptor_ref (or, failing that, its query_id). Rankings without ground
/// truth raise a missing-query error listing their ids; ground-truth queries
/// without a ranking score zero and are noted in the warnings.
EvalReport evaluate(std::span<const RankedList> results, std::span<const GroundTruthQuery> ground_truth,
                    const LocScoreConfig& config);

/// Per-bin mAP and LocScore. Within a bin each query keeps only its positives
/// in that bin; its other positives are removed from the ranking. Queries with
/// no positive in a bin are excluded from that bin.
SliceReport slice_eval(std::span<const RankedList> results, std::span<const GroundTruthQuery> ground_truth,
                       const LocScoreConfig& config, SliceAxis axis, std::size_t bins = 5,
                       Binning binning = Binning::kEqualWidth);

std::string report_to_json(const EvalReport& report);

}  // namespace patchwise
