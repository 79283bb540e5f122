"""Finite-dimensional lp geometry: norms, balls, separations, projections.

Points are plain numpy float arrays. Every predicate that has to decide a
boundary case takes an explicit ``tol``; for the l1 and l-infinity norms with
integer-valued data the comparisons are done exactly and ``tol`` is ignored.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import brentq

from kissmax.errors import InputError

DEFAULT_TOL = 1e-9
INF = math.inf


class Kind(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class NormedSpace:
    """R^d equipped with the lp norm; ``p=INF`` selects the max norm."""

    dimension: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dimension!r}")
        if not (self.p == INF or (math.isfinite(self.p) and self.p >= 1)):
            raise InputError(f"norm exponent must be >= 1 or INF, got {self.p!r}")
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "p", float(self.p))

    @property
    def is_inf(self) -> bool:
        return self.p == INF

    @property
    def label(self) -> str:
        return "inf" if self.is_inf else f"{self.p:g}"

    def check(self, v, what="point") -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.shape[-1:] != (self.dimension,):
            raise InputError(
                f"{what} has dimension {arr.shape[-1] if arr.ndim else 0}, "
                f"space has dimension {self.dimension}"
            )
        return arr

    def norm(self, v, axis=-1) -> np.ndarray | float:
        """Vectorised norm along ``axis``."""
        v = np.asarray(v, dtype=float)
        if self.is_inf:
            return np.max(np.abs(v), axis=axis)
        if self.p == 1.0:
            return np.sum(np.abs(v), axis=axis)
        if self.p == 2.0:
            return np.sqrt(np.sum(v * v, axis=axis))
        return np.linalg.norm(v, ord=self.p, axis=axis)

    @property
    def exact_capable(self) -> bool:
        return self.is_inf or self.p == 1.0


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float
    kind: Kind = Kind.CLOSED

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not (self.radius > 0):
            raise InputError(f"ball radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "radius", float(self.radius))


def norm_eval(space: NormedSpace, v) -> float:
    return float(space.norm(space.check(v)))


def _integral(*arrays) -> bool:
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if not np.all(np.isfinite(a)) or not np.all(a == np.round(a)) or np.any(np.abs(a) > 2**50):
            return False
    return True


def exact_distance(space: NormedSpace, a, b) -> int | None:
    """Integer distance for l1 / l-inf on integer data, else None."""
    if not space.exact_capable or not _integral(a, b):
        return None
    diff = [abs(int(x) - int(y)) for x, y in zip(np.asarray(a, float), np.asarray(b, float))]
    return max(diff) if space.is_inf else sum(diff)


def distance(space: NormedSpace, a, b) -> float:
    return float(space.norm(space.check(a) - space.check(b)))


def ball_contains(space: NormedSpace, b: Ball, y, tol: float = DEFAULT_TOL) -> bool:
    """Membership with a tolerance: closed balls are widened, open balls shrunk."""
    c = space.check(b.center, "ball center")
    y = space.check(y)
    exact = exact_distance(space, c, y)
    if exact is not None:
        return exact <= b.radius if b.kind is Kind.CLOSED else exact < b.radius
    d = float(space.norm(y - c))
    if b.kind is Kind.CLOSED:
        return d <= b.radius + tol
    return d < b.radius - tol


def contains_many(space: NormedSpace, centers, radii, kind: Kind, y, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorised ``ball_contains`` of one point ``y`` in several balls."""
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    y = np.asarray(y, dtype=float)
    if space.exact_capable and _integral(centers, y):
        d = space.norm(centers - y)
        return d <= radii if kind is Kind.CLOSED else d < radii
    d = space.norm(centers - y)
    if kind is Kind.CLOSED:
        return d <= radii + tol
    return d < radii - tol


def angular_lower_bound(space: NormedSpace, x, y) -> tuple[float, float]:
    """Both sides of the angular-distance inequality for nonzero x, y.

    Returns ``(lhs, rhs)`` with lhs = ||x/|x| - y/|y|| and
    rhs = (||x - y|| - | |x| - |y| |) / min(|x|, |y|); lhs >= rhs for every norm.
    """
    x = space.check(x)
    y = space.check(y)
    nx, ny = float(space.norm(x)), float(space.norm(y))
    if nx == 0 or ny == 0:
        raise InputError("angular_lower_bound needs nonzero vectors")
    lhs = float(space.norm(x / nx - y / ny))
    rhs = (float(space.norm(x - y)) - abs(nx - ny)) / min(nx, ny)
    return lhs, rhs


def pairwise_distances(space: NormedSpace, pts) -> np.ndarray:
    pts = space.check(pts, "points")
    return space.norm(pts[:, None, :] - pts[None, :, :])


def min_separation(space: NormedSpace, pts) -> float:
    pts = space.check(pts, "points")
    if pts.ndim != 2 or len(pts) < 2:
        raise InputError("min_separation needs at least 2 points")
    if len(pts) > 2000:
        return min(float(space.norm(pts[i + 1:] - pts[i]).min()) for i in range(len(pts) - 1))
    d = pairwise_distances(space, pts)
    iu = np.triu_indices(len(pts), k=1)
    return float(d[iu].min())


def closest_pair(space: NormedSpace, pts) -> tuple[int, int]:
    pts = space.check(pts, "points")
    best, pair = INF, (0, 1)
    for i, j in combinations(range(len(pts)), 2):
        d = float(space.norm(pts[i] - pts[j]))
        if d < best:
            best, pair = d, (i, j)
    return pair


# -- Euclidean projections onto lp balls ---------------------------------------

def _project_l1(v: np.ndarray, r: float) -> np.ndarray:
    a = np.abs(v)
    if a.sum() <= r:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - (css - r) / k > 0)[0][-1]
    theta = (css[rho] - r) / (rho + 1)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def _project_lp(v: np.ndarray, r: float, p: float) -> np.ndarray:
    # KKT: x_i = sign(v_i) t_i with t_i + lam*p*t_i^(p-1) = |v_i|; bisect on lam.
    a = np.abs(v)
    if np.sum(a**p) <= r**p:
        return v.copy()

    def coords(lam):
        lo, hi = np.zeros_like(a), a.copy()
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            over = mid + lam * p * mid ** (p - 1) > a
            hi = np.where(over, mid, hi)
            lo = np.where(over, lo, mid)
        return 0.5 * (lo + hi)

    excess = lambda lam: float(np.sum(coords(lam) ** p)) - r**p
    lam_hi = 1.0
    while excess(lam_hi) > 0:
        lam_hi *= 4.0
    lam = brentq(excess, 0.0, lam_hi, xtol=1e-300, rtol=1e-15, maxiter=200)
    t = coords(lam)
    # land on the feasible side of the sphere
    t *= min(1.0, r / float(np.sum(t**p)) ** (1.0 / p))
    return np.sign(v) * t


def project_to_ball(space: NormedSpace, center, radius: float, y) -> np.ndarray:
    """Nearest point (Euclidean) of the closed lp ball B(center, radius) to y."""
    c = np.asarray(center, dtype=float)
    v = np.asarray(y, dtype=float) - c
    if space.is_inf:
        return c + np.clip(v, -radius, radius)
    if space.p == 2.0:
        n = math.sqrt(float(v @ v))
        return c + (v if n <= radius else v * (radius / n))
    if space.p == 1.0:
        return c + _project_l1(v, radius)
    return c + _project_lp(v, radius, space.p)
