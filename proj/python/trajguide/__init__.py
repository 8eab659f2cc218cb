"""Python access to the trajguide benchmark core.

Geometry, worlds, oracle guidance and the MPPI weights are exposed directly.
Suites and sweeps take a YAML run config (the same document the CLI reads)
and return one dict per episode.
"""

import csv
import io
import json

from ._trajguide import *  # noqa: F401,F403
from ._trajguide import (
    _aggregate_csv,
    _init_curve_csv,
    _run_suite_jsonl,
    _sweep_jsonl,
)


def _jsonl(records):
    return "".join(json.dumps(r) + "\n" for r in records)


def run_suite(config="", workers=0):
    """Runs the suite described by a YAML config; workers=0 uses run.workers."""
    return [json.loads(line) for line in _run_suite_jsonl(config, workers).splitlines()]


def sweep(config="", workers=0):
    """Runs the camera-mismatch sweep described by the config's sweep section."""
    return [json.loads(line) for line in _sweep_jsonl(config, workers).splitlines()]


def aggregate(records):
    """Per (task, init, camera_mode, controller) SR/SPL rows as dicts."""
    return list(csv.DictReader(io.StringIO(_aggregate_csv(_jsonl(records)))))


def init_distance_curve(records, bucket=0.5):
    """SR over start offset for off-trajectory episodes, one dict per bucket."""
    return list(csv.DictReader(io.StringIO(_init_curve_csv(_jsonl(records), bucket))))
