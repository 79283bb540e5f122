"""Finitely supported measures and functions on their atoms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from kissmax.errors import InputError
from kissmax.geometry import DEFAULT_TOL, Ball, NormedSpace, contains_many


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """sum_i w_i * delta_{x_i} with distinct points and positive weights.

    Build with :meth:`from_atoms`, which merges repeated points by summing their
    weights. ``source_index[k]`` is the merged atom that input atom ``k`` went to.
    """

    space: NormedSpace
    points: np.ndarray
    weights: np.ndarray
    source_index: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_atoms(cls, space: NormedSpace, points, weights=None) -> "DiscreteMeasure":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1 and space.dimension == 1:
            pts = pts[:, None]
        pts = space.check(pts, "atom")
        if pts.ndim != 2:
            raise InputError("atoms must be a list of points")
        w = np.ones(len(pts)) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (len(pts),):
            raise InputError(f"got {len(w)} weights for {len(pts)} atoms")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
            raise InputError("atoms and weights must be finite")
        if np.any(w <= 0):
            raise InputError("atom weights must be strictly positive")

        slot: dict[tuple, int] = {}
        index = np.empty(len(pts), dtype=int)
        merged_pts, merged_w = [], []
        for k, (x, wk) in enumerate(zip(pts, w)):
            key = tuple(x.tolist())
            if key in slot:
                merged_w[slot[key]] += wk
            else:
                slot[key] = len(merged_pts)
                merged_pts.append(x)
                merged_w.append(float(wk))
            index[k] = slot[key]
        return cls(space, np.array(merged_pts).reshape(-1, space.dimension), np.array(merged_w), index)

    def __len__(self):
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def check_function(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape[-1:] != (len(self),):
            raise InputError(f"function has {f.shape[-1] if f.ndim else 0} values, measure has {len(self)} atoms")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise InputError("atom function values must be finite and nonnegative")
        return f

    def inside(self, b: Ball, tol: float = DEFAULT_TOL) -> np.ndarray:
        if b.center.shape != (self.space.dimension,):
            raise InputError("ball and measure live in different dimensions")
        return contains_many(self.space, self.points, np.full(len(self), b.radius), b.kind, b.center, tol)


def merge_atom_function(space: NormedSpace, points, weights, values) -> tuple[DiscreteMeasure, np.ndarray]:
    """Build a measure and its aligned function from raw (possibly repeated) atoms."""
    mu = DiscreteMeasure.from_atoms(space, points, weights)
    raw_w = np.ones(len(mu.source_index)) if weights is None else np.asarray(weights, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape != raw_w.shape:
        raise InputError(f"function has {len(values)} values, input had {len(raw_w)} atoms")
    if np.any(values < 0):
        raise InputError("atom function values must be nonnegative")
    num = np.bincount(mu.source_index, weights=values * raw_w, minlength=len(mu))
    return mu, num / mu.weights


def ball_mass(mu: DiscreteMeasure, b: Ball, tol: float = DEFAULT_TOL) -> float:
    return float(mu.weights[mu.inside(b, tol)].sum())


def ball_integral(mu: DiscreteMeasure, f, b: Ball, tol: float = DEFAULT_TOL) -> float:
    f = mu.check_function(f)
    sel = mu.inside(b, tol)
    return float((f[sel] * mu.weights[sel]).sum())


def l_norm(mu: DiscreteMeasure, f, p: float) -> float:
    """||f||_{L^p(mu)} for 1 <= p < inf."""
    if not p >= 1:
        raise InputError(f"exponent must be >= 1, got {p}")
    f = mu.check_function(f)
    return float(np.sum(f**p * mu.weights) ** (1.0 / p))
