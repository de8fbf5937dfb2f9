#!/usr/bin/env python3
# Copyright 2026 The lmmeter Authors
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
"""Regenerates the golden files from first principles.

Nothing here calls the C++ library. The small trace below is duplicated by
hand in tests/test_support.h.
"""

import csv
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

HEADER = {
    "ev": "session",
    "version": 1,
    "device_label": "golden-device",
    "clock_offset_ns": 250,
    "prompt_tokens": 4,
    "output_tokens": 1,
}

# kind, turn, token, start, end
PHASES = [
    ("embedding", 0, None, 0, 1500),
    ("prefill", 0, None, 1500, 12345),
    ("decode", 0, 0, 12345, 20001),
    ("softmax", 0, 0, 20001, 20500),
    ("copy_probs_to_cpu", 0, 0, 20500, 21999),
    ("sampling", 0, 0, 21999, 22064),
]

# name, queue, enqueue, queued, submit, start, end (sorted by queued)
KERNELS = [
    ("dequantize_take1", 0, 100, 110, 115, 122, 1160),
    ("rms_norm1", 0, 1600, 1700, 1703, 1710, 2711),
    ("batch_prefill_paged_kv", 1, 1650, 1720, 1725, 1800, 9999),
    ('matmul "fused"', 0, 1660, 1730, 1730, 10001, 12000),
    ("batch_decode_paged_kv", 0, 12400, 12500, 12502, 12600, 13601),
    ("rms_norm1", 0, 13650, 13700, 13750, 13800, 14333),
    ("batch_decode_paged_kv", 0, 14400, 14500, 14500, 14500, 19999),
    ("chunk_lse", 0, 20010, 20020, 20030, 20040, 20480),
]


def dumps(obj):
    return json.dumps(obj, separators=(",", ":"))


def write_jsonl(path):
    lines = [dumps(HEADER)]
    for kind, turn, token, start, end in PHASES:
        lines.append(dumps({"ev": "phase", "kind": kind, "turn": turn,
                            "token": token, "t_start_ns": start,
                            "t_end_ns": end}))
    for name, queue, enq, queued, submit, start, end in KERNELS:
        lines.append(dumps({"ev": "kernel", "name": name, "queue": queue,
                            "t_cpu_enqueue_ns": enq, "t_queued_ns": queued,
                            "t_submit_ns": submit, "t_start_ns": start,
                            "t_end_ns": end}))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def us(ns):
    return ns / 1000


def write_chrome(path):
    events = []
    for kind, turn, token, start, end in PHASES:
        events.append({"name": kind, "cat": "phase", "ph": "X", "ts": us(start),
                       "dur": us(end - start), "pid": 1, "tid": 0,
                       "args": {"turn": turn, "token": token}})
    for name, queue, enq, queued, submit, start, end in KERNELS:
        events.append({"name": name, "cat": "kernel", "ph": "X",
                       "ts": us(start), "dur": us(end - start), "pid": 1,
                       "tid": queue + 1,
                       "args": {"queuing_us": us(submit - queued),
                                "dispatch_us": us(start - submit)}})
    with open(path, "w", newline="\n") as f:
        f.write(dumps({"traceEvents": events}) + "\n")


def write_aggregate_csv(path):
    totals = {}
    counts = {}
    for name, _, _, _, _, start, end in KERNELS:
        totals[name] = totals.get(name, 0) + (end - start)
        counts[name] = counts.get(name, 0) + 1
    busy = sum(totals.values())
    names = sorted(totals, key=lambda n: (-totals[n], n))
    rows = ["name,count,mean_ms,total_ms,share"]
    for n in names:
        field = '"' + n.replace('"', '""') + '"' if any(
            c in n for c in ',"\n\r') else n
        mean_ms = (totals[n] / counts[n]) / 1e6
        rows.append("%s,%d,%.4f,%.4f,%.4f" % (field, counts[n], mean_ms,
                                              totals[n] / 1e6,
                                              totals[n] / busy))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(rows) + "\n")


def write_phase_accuracy_csv(path):
    rows = ["model,phase,lm_meter_ms,ground_truth_ms,alpha_pct,"
            "eps_star_us_per_ms"]
    with open(os.path.join(DATA, "published_phase_latency.csv")) as f:
        for r in csv.DictReader(f):
            lm = float(r["lm_meter_ms"])
            gt = float(r["ground_truth_ms"])
            d = abs(lm - gt)
            alpha = (1.0 - d / gt) * 100.0
            eps = 1000.0 * d / gt
            rows.append("%s,%s,%.4f,%.4f,%.2f,%.3f" % (
                r["model"], r["phase"], lm, gt, alpha, eps))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    write_jsonl(os.path.join(HERE, "small_trace.jsonl"))
    write_chrome(os.path.join(HERE, "small_trace.chrome.json"))
    write_aggregate_csv(os.path.join(HERE, "small_trace_aggregate.csv"))
    write_phase_accuracy_csv(os.path.join(HERE, "phase_accuracy_report.csv"))
