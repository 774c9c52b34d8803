# Copyright 2026-present the patchwise project
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Patch-level image retrieval with flat and IVFPQ indexes."""

import json

from ._patchwise import (
    GroundTruthPositive,
    GroundTruthQuery,
    ImageRecord,
    Index,
    NormRect,
    PatchEntry,
    PatchwiseError,
    PixelBox,
    RankedList,
    average_precision,
    decode_embeddings,
    encode_embeddings,
    format_ground_truth,
    format_results,
    grid_patches,
    iou,
    locscore,
    locscore_thresholded,
    mlocscore,
    normalize,
    parse_ground_truth,
    parse_results,
    read_embeddings,
    read_ground_truth,
    sliding_windows,
    synth,
    to_norm,
    to_pixel,
    write_embeddings,
)
from ._patchwise import evaluate_json as _evaluate_json


def evaluate(results, ground_truth, thresholds=(0.3, 0.4, 0.5), k=1000):
    """Scores rankings against ground truth and returns the report as a dict."""
    return json.loads(_evaluate_json(list(results), list(ground_truth), list(thresholds), k))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
