"""CSV and JSON emission of experiment results.

Floats are written with ``repr``, the shortest decimal string that reads
back to the same double; missing values are empty fields.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import platform

import numpy as np
import scipy

from . import __version__

RECORD_HEADER = ["experiment", "n", "epsilon", "replication", "value"]
SUMMARY_HEADER = ["n", "epsilon", "count", "mean", "variance", "ks", "corr", "median_error",
                  "verdict"]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def records_csv(result) -> str:
    header = RECORD_HEADER + (["value2"] if result.has_value2 else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in result.records:
        row = [result.experiment, fmt(r.n), fmt(r.epsilon), fmt(r.replication), fmt(r.value)]
        if result.has_value2:
            row.append(fmt(r.value2))
        w.writerow(row)
    return buf.getvalue()


def summary_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for s in result.summaries:
        w.writerow([fmt(s.get(k)) for k in SUMMARY_HEADER])
    return buf.getvalue()


def manifest(result, cfg, seed_override=None) -> dict:
    return _jsonable({
        "experiment": result.experiment,
        "verdict": "pass" if result.passed else "fail",
        "config": cfg.spec,
        "seed": cfg.seed,
        "seed_override": seed_override,
        "convention_factor": cfg.convention_factor,
        "tolerances": cfg.tolerances,
        "details": result.details,
        "versions": {"graphlap": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
    })


def emit_results(result, prefix: str, cfg, seed_override=None) -> list:
    """Write ``PREFIX_records.csv``, ``PREFIX_summary.csv`` and ``PREFIX_manifest.json``."""
    parent = os.path.dirname(prefix)
    if parent:
        os.makedirs(parent, exist_ok=True)
    files = [
        (f"{prefix}_records.csv", records_csv(result)),
        (f"{prefix}_summary.csv", summary_csv(result)),
        (f"{prefix}_manifest.json",
         json.dumps(manifest(result, cfg, seed_override), indent=2, sort_keys=True) + "\n"),
    ]
    for path, text in files:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return [p for p, _ in files]
