"""Seeded random profiles and fields for property checks and CLI batches."""

from __future__ import annotations

import numpy as np

from .disk import DiskField
from .radial import DEFAULT_N, RadialProfile, area_nodes

FIELD_KINDS = ("iid", "blob", "patch")


def random_radial_profile(rng, n=DEFAULT_N, m=0.4, ceiling=10.0):
    """Positive profile built from a floor, a few Gaussian bumps in ``s`` and
    optional cellwise noise, rescaled to mass fraction ``m``."""
    s = area_nodes(n)
    v = np.full(n, rng.uniform(0.05, 1.0))
    for _ in range(int(rng.integers(1, 6))):
        c, w = rng.uniform(), rng.uniform(0.05, 0.5)
        v += rng.uniform(0, 1) * np.exp(-(((s - c) / w) ** 2))
    if rng.uniform() < 0.5:
        v = v + rng.uniform(0, 0.5) * rng.uniform(size=n)
    return RadialProfile.from_values(v, ceiling=ceiling, mass_fraction=m)


def random_disk_field(rng, n_r=96, n_theta=None, kind=None):
    """Random field with values in ``[0, 1]`` and maximum 1.

    ``kind`` is one of ``iid`` (independent cell values), ``blob`` (an
    off-center Gaussian) or ``patch`` (an off-center disk indicator); by
    default it is drawn at random.
    """
    n_theta = n_r if n_theta is None else n_theta
    if kind is None:
        kind = FIELD_KINDS[int(rng.integers(len(FIELD_KINDS)))]
    while True:
        if kind == "iid":
            v = rng.uniform(0, 1, (n_r, n_theta))
        elif kind == "blob":
            c = rng.uniform(-0.6, 0.6, 2)
            w = rng.uniform(0.1, 0.5)
            v = DiskField.rasterize(
                lambda x, y: np.exp(-((x - c[0]) ** 2 + (y - c[1]) ** 2) / w**2),
                n_r, n_theta,
            ).values
        elif kind == "patch":
            c = rng.uniform(-0.5, 0.5, 2)
            rad = rng.uniform(0.1, 0.45)
            v = DiskField.rasterize(
                lambda x, y: ((x - c[0]) ** 2 + (y - c[1]) ** 2 < rad**2) * 1.0,
                n_r, n_theta,
            ).values
        else:
            raise ValueError(f"unknown field kind {kind!r}")
        if v.max() > 0:
            return DiskField(v / v.max())
