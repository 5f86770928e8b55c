"""Structured-text (JSON) configs, CSV writers, and run manifests.

One config format serves every CLI subcommand; flags may override any field.
CSV output is byte-deterministic for a fixed config (floats at 17 significant
digits); the manifest carries the full resolved config plus a timestamp, and
is the only non-reproducible artifact.
"""

from __future__ import annotations

import datetime
import json
import math
import os
import tempfile

from .errors import ConfigError
from .thermo import GaussianDispersion, dispersion_from_dict
from .weights import WeightSequence

FORMAT_VERSION = 1


def fmt(x):
    """Deterministic cell formatting for CSV output."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(x)


def write_csv(path, header, rows):
    """Write rows atomically; no partial file is left on failure."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join(fmt(x) for x in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(path, payload):
    out = dict(payload)
    out["format_version"] = FORMAT_VERSION
    out["written_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w") as f:
        json.dump(out, f, indent=2, sort_keys=True)
        f.write("\n")


def load_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed config {path}: {e}") from e


def weights_from_config(cfg):
    """{"explicit": [...], "tail": {"kind", "c", "p"}, "shift": c} -> WeightSequence."""
    try:
        return WeightSequence.from_dict(cfg or {})
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"bad weights config: {e}") from e


def dispersion_from_config(cfg):
    try:
        return dispersion_from_dict(cfg)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"bad dispersion config: {e}") from e


def gaussian_dispersion(beta, d):
    try:
        return GaussianDispersion(float(beta), int(d))
    except ValueError as e:
        raise ConfigError(str(e)) from e
