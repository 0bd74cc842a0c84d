"""CSV and JSON emission with a provenance header.

Floats are written with 17 significant digits so that every value
round-trips exactly.  No timestamps or paths are recorded, so identical
configurations give byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError
from .radial import RadialProfile, area_nodes

FLOAT_FMT = "%.17g"


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def provenance(config):
    return {"package": "vortentropy", "version": __version__, "config": _clean(config)}


def _header_lines(config):
    return [
        f"# vortentropy {__version__}",
        "# config: " + json.dumps(_clean(config), sort_keys=True),
    ]


def write_csv(path, columns, data, config=None):
    """Write ``data`` (sequence of equal-length arrays) under ``columns``."""
    arr = np.column_stack([np.asarray(c, dtype=float) for c in data])
    lines = _header_lines(config or {})
    lines.append(",".join(columns))
    lines.extend(",".join(FLOAT_FMT % x for x in row) for row in arr)
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Return ``(columns, array)`` of a file written by :func:`write_csv`."""
    columns, rows = None, []
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        if columns is None:
            columns = line.split(",")
            continue
        rows.append([float(x) for x in line.split(",")])
    if columns is None:
        raise DomainError(f"{path}: no header row")
    return columns, np.array(rows, dtype=float).reshape(-1, len(columns))


def write_json(path, record, config=None):
    body = dict(_clean(record))
    body["provenance"] = provenance(config or {})
    Path(path).write_text(json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# -- domain objects -----------------------------------------------------------


def write_profile_csv(path, profile, config=None):
    s = area_nodes(profile.n)
    write_csv(path, ("s", "r", "omega"), (s, np.sqrt(s), profile.values), config)


def read_profile_csv(path, ceiling=1.0):
    cols, arr = read_csv(path)
    if "omega" not in cols:
        raise DomainError(f"{path}: expected an 'omega' column, got {cols}")
    return RadialProfile(arr[:, cols.index("omega")], ceiling)


def profile_record(profile):
    return {
        "n": profile.n,
        "m": profile.mass_fraction,
        "L": profile.ceiling,
        "values": profile.values,
    }


def write_field_csv(path, field, config=None):
    r = np.repeat(field.radii, field.n_theta)
    th = np.tile(field.angles, field.n_r)
    write_csv(path, ("r", "theta", "omega"), (r, th, field.values.ravel()), config)


def field_record(field):
    return {
        "n_r": field.n_r,
        "n_theta": field.n_theta,
        "L": field.ceiling,
        "m": field.mass_fraction,
        "values": field.values,
    }


def write_map_csv(path, tmap, config=None):
    write_csv(path, ("r", "T", "phi"), (tmap.r, tmap.T, tmap.phi), config)


def write_curve_csv(path, curve, config=None):
    write_csv(
        path, ("beta", "e", "s", "g"),
        (curve.betas, curve.energies, curve.entropies, curve.free_energies), config,
    )


def maximizer_record(report, profile_ref=None):
    return {
        "beta": report.beta,
        "lambda": report.lam,
        "r_sat": report.r_sat,
        "free_energy": report.free_energy,
        "energy": report.energy,
        "entropy": report.entropy,
        "residual": report.residual,
        "iterations": report.iterations,
        "saturated_cells": report.saturated,
        "extrapolated": report.extrapolated,
        "grid_defect": report.grid_defect,
        "profile_ref": profile_ref,
    }
