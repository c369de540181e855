"""Loading distributions and experiments from JSON config files.

Distribution objects (``kind`` selects the rest of the keys)::

    {"kind": "lattice", "support": [0, 1], "probs": [0.7, 0.3]}
    {"kind": "grid-density", "preset": "uniform", "lo": -1.7, "hi": 1.7, "intervals": 4096}
    {"kind": "grid-density", "lo": 0, "hi": 1, "values": [...], "bounded_away": true}
    {"kind": "mixture", "weight_p": 0.5, "continuous": {grid-density}, "atomic": {lattice}}
    {"kind": "gaussian-mixture", "weight_p": 0.5, "mu1": 0, "var1": 1, "mu2": 1, "var2": 1}
    {"kind": "exponential"}          # Exp(1) summands, exact gamma oracle

Experiment objects::

    {"distribution": {...} | "path/to/dist.json",
     "n": [16, 32, 64],
     "correction": "on" | "off",
     "evaluation": {"xs": [...]},     # optional, default grid or lattice midpoints
     "output": "report.csv",          # optional
     "seed": 0, "samples": 200000,    # Monte Carlo only
     "thresholds": {"on_max": -0.9, "off_range": [-0.6, -0.4]}}
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .distributions import (
    GaussianMixturePair,
    GridDensity,
    LatticeDistribution,
    TwoPartMixture,
    preset_density,
)
from .errors import ValidationError
from .oracle import ExponentialSummands


def _require(obj: dict, *keys):
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ValidationError(f"{obj.get('kind', 'distribution')} config is missing {missing}")


def load_distribution(obj, base_dir: str | os.PathLike | None = None):
    """Build a distribution object from a dict (or a path to a JSON file)."""
    if isinstance(obj, (str, os.PathLike)):
        path = Path(obj)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_distribution(read_json(path), path.parent)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValidationError("distribution config must be an object with a 'kind'")
    kind = obj["kind"]
    if kind == "lattice":
        _require(obj, "support", "probs")
        return LatticeDistribution(tuple(obj["support"]), tuple(obj["probs"]))
    if kind == "grid-density":
        if "preset" in obj:
            return preset_density(obj["preset"], obj.get("lo"), obj.get("hi"),
                                  int(obj.get("intervals", 4096)), float(obj.get("rate", 1.0)))
        _require(obj, "lo", "hi", "values")
        return GridDensity(float(obj["lo"]), float(obj["hi"]), obj["values"], bool(obj.get("bounded_away", False)))
    if kind == "mixture":
        _require(obj, "weight_p", "continuous")
        atomic = obj.get("atomic")
        return TwoPartMixture(
            float(obj["weight_p"]),
            load_distribution(obj["continuous"], base_dir),
            load_distribution(atomic, base_dir) if atomic is not None else None,
        )
    if kind == "gaussian-mixture":
        _require(obj, "weight_p", "mu1", "var1", "mu2", "var2")
        return GaussianMixturePair(*(float(obj[k]) for k in ("weight_p", "mu1", "var1", "mu2", "var2")))
    if kind == "exponential":
        return ExponentialSummands()
    raise ValidationError(f"unknown distribution kind {kind!r}")


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from exc
