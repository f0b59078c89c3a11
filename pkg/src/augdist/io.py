"""JSON file formats: measure specs, projections and distance reports.

+inf is written as the string "inf" since JSON has no infinity literal.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .augmented import DistanceReport
from .errors import InvalidParameter
from .measures import AffineProjection, Measure, measure_from_spec, measure_to_spec


def encode_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def decode_float(x) -> float:
    if isinstance(x, str):
        if x in ("inf", "-inf"):
            return float(x)
        raise InvalidParameter(f"unexpected string {x!r} where a number was expected")
    return float(x)


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidParameter(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidParameter(f"{path} must hold a JSON object")
    return data


def load_measure(path) -> Measure:
    return measure_from_spec(_read_json(path))


def save_measure(measure: Measure, path) -> None:
    write_json(measure_to_spec(measure), path)


def projection_to_dict(phi: AffineProjection) -> dict:
    return {"V": phi.V.tolist(), "b": phi.b.tolist()}


def projection_from_dict(data: dict) -> AffineProjection:
    if "projection" in data and isinstance(data["projection"], dict):
        data = data["projection"]
    try:
        return AffineProjection(np.asarray(data["V"], dtype=float), np.asarray(data["b"], dtype=float))
    except KeyError as exc:
        raise InvalidParameter(f"projection is missing field {exc}") from None


def load_projection(path) -> AffineProjection:
    """Read a projection file, or the certificate inside a report file."""
    return projection_from_dict(_read_json(path))


def report_to_dict(
    report: DistanceReport,
    *,
    seed: Optional[int] = None,
    wall_ms: Optional[float] = None,
    extra: Optional[dict] = None,
) -> dict:
    out = {
        "value": encode_float(report.value),
        "method": report.method,
        "projection": projection_to_dict(report.projection) if report.projection is not None else None,
    }
    if report.plan is not None:
        out["plan"] = report.plan.triplets()
    out["seed"] = seed
    out["restarts_agreeing"] = report.restarts_agreeing
    out["iterations"] = report.iterations
    if wall_ms is not None:
        out["wall_ms"] = wall_ms
    if extra:
        out.update(extra)
    return out


def write_json(data: dict, path=None) -> str:
    text = json.dumps(data, indent=2, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
