"""Coordinate charts with diagonal metrics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Chart:
    """A coordinate chart with a diagonal metric g = sum g_ii(x) dx_i^2.

    ``periods`` maps an axis to its period (angles).  Singular points (disk
    center, pole) are represented with NaN in the periodic coordinate.
    """

    kind: str
    dim: int
    periods: dict = field(default_factory=dict)

    def metric_diagonal(self, x):
        """Array (npts, dim) of g_ii at the chart points ``x``."""
        x = np.atleast_2d(x)
        g = np.ones_like(x, dtype=float)
        if self.kind == "polar":
            g[:, 1] = x[:, 0] ** 2
        elif self.kind == "spherical":
            g[:, 1] = np.sin(x[:, 0]) ** 2
        return g

    def to_cartesian(self, x):
        """Embedding of chart points into R^2 (or R^3 for the sphere)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "cartesian":
            return x.copy()
        ang = np.nan_to_num(x[:, 1])
        if self.kind == "polar":
            return np.column_stack([x[:, 0] * np.cos(ang), x[:, 0] * np.sin(ang)])
        if self.kind == "spherical":
            th = x[:, 0]
            return np.column_stack([np.sin(th) * np.cos(ang), np.sin(th) * np.sin(ang), np.cos(th)])
        raise ValueError(f"unknown chart kind {self.kind!r}")

    def unwrap(self, axis, value, lo, hi):
        """Shift a periodic coordinate next to the interval [lo, hi]."""
        period = self.periods.get(axis)
        if period is None or np.isnan(value) or np.isnan(lo):
            return value
        mid = 0.5 * (lo + hi)
        return value + period * np.round((mid - value) / period)


def cartesian(dim):
    return Chart("cartesian", dim)


def polar():
    """(r, phi) on the plane."""
    return Chart("polar", 2, {1: 2 * np.pi})


def spherical():
    """(theta, phi) on the unit sphere; theta is the polar angle."""
    return Chart("spherical", 2, {1: 2 * np.pi})
