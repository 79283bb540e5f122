"""Besicovitch families: validation, greedy selection, depth, open/closed conversion."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx
import numpy as np

from kissmax.errors import InputError
from kissmax.geometry import (
    DEFAULT_TOL,
    Ball,
    Kind,
    NormedSpace,
    _integral,
    ball_contains,
    contains_many,
    project_to_ball,
)

MAX_DEPTH_BALLS = 64


@dataclass(frozen=True, eq=False)
class BallFamily:
    space: NormedSpace
    centers: np.ndarray
    radii: np.ndarray
    kind: Kind = Kind.CLOSED

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim == 1 and self.space.dimension == 1:
            centers = centers[:, None]
        centers = self.space.check(centers, "ball center")
        radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if centers.ndim != 2 or len(centers) == 0:
            raise InputError("a ball family needs at least one ball")
        if radii.shape != (len(centers),):
            raise InputError(f"got {len(radii)} radii for {len(centers)} centers")
        if np.any(~(radii > 0)) or not np.all(np.isfinite(radii)):
            raise InputError("ball radii must be positive and finite")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def from_balls(cls, space: NormedSpace, balls: list[Ball]) -> "BallFamily":
        kinds = {b.kind for b in balls}
        if len(kinds) > 1:
            raise InputError("all balls in a family must be of one kind")
        return cls(space, [b.center for b in balls], [b.radius for b in balls], kinds.pop() if kinds else Kind.CLOSED)

    def __len__(self):
        return len(self.radii)

    def ball(self, i: int) -> Ball:
        return Ball(self.centers[i], self.radii[i], self.kind)

    @property
    def balls(self) -> list[Ball]:
        return [self.ball(i) for i in range(len(self))]

    def subfamily(self, idx) -> "BallFamily":
        idx = list(idx)
        return BallFamily(self.space, self.centers[idx], self.radii[idx], self.kind)

    def contains(self, y, tol: float = DEFAULT_TOL) -> np.ndarray:
        return contains_many(self.space, self.centers, self.radii, self.kind, self.space.check(y), tol)


def validate_family(fam: BallFamily, tol: float = DEFAULT_TOL) -> tuple[bool, tuple[int, int] | None]:
    """Check that no ball contains another ball's center.

    Returns ``(True, None)`` or ``(False, (i, j))`` for the first offending pair in
    lexicographic order. Boundary cases follow :func:`ball_contains`: a closed
    ball with a center within ``tol`` of its sphere counts as a violation.
    """
    for i, j in combinations(range(len(fam)), 2):
        if ball_contains(fam.space, fam.ball(i), fam.centers[j], tol) or ball_contains(
            fam.space, fam.ball(j), fam.centers[i], tol
        ):
            return False, (i, j)
    return True, None


def greedy_select(fam: BallFamily, tol: float = DEFAULT_TOL) -> BallFamily:
    """Largest-radius-first selection of balls whose centers are still uncovered."""
    order = sorted(range(len(fam)), key=lambda i: -fam.radii[i])
    chosen: list[int] = []
    for i in order:
        if not any(ball_contains(fam.space, fam.ball(j), fam.centers[i], tol) for j in chosen):
            chosen.append(i)
    return fam.subfamily(chosen)


def open_closed_convert(fam: BallFamily, target_kind: Kind, common_point, tol: float = DEFAULT_TOL) -> BallFamily:
    """Swap an intersecting family between open and closed balls, keeping its depth.

    closed -> open enlarges each radius to the distance to the nearest other
    center; open -> closed shrinks each ball to pass through ``common_point``.
    """
    y = fam.space.check(common_point)
    if not fam.contains(y, tol).all():
        raise InputError("common_point is not in every ball of the family")
    if target_kind is fam.kind:
        return fam
    if target_kind is Kind.OPEN:
        if len(fam) == 1:
            radii = 2.0 * fam.radii
        else:
            d = fam.space.norm(fam.centers[:, None, :] - fam.centers[None, :, :])
            np.fill_diagonal(d, math.inf)
            radii = d.min(axis=1)
    else:
        radii = fam.space.norm(fam.centers - y)
        if np.any(radii <= 0):
            raise InputError("common_point coincides with a center; no closed ball through it")
    return BallFamily(fam.space, fam.centers.copy(), radii, target_kind)


# -- depth ----------------------------------------------------------------------

@dataclass
class DepthReport:
    depth: int
    witness_point: np.ndarray
    witness_subset: list[int]
    method: str = "CLIQUE_FEASIBILITY"
    indeterminate: list[list[int]] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "witness_point": [float(v) for v in self.witness_point],
            "witness_subset": list(self.witness_subset),
            "method": self.method,
            "indeterminate": self.indeterminate,
            "flags": self.flags,
        }


@dataclass
class Feasibility:
    point: np.ndarray | None
    violation: float
    sweeps: int
    converged: bool


def _pair_intersects(space: NormedSpace, fam: BallFamily, i: int, j: int, tol: float) -> bool:
    ci, cj = fam.centers[i], fam.centers[j]
    reach = fam.radii[i] + fam.radii[j]
    if space.exact_capable and _integral(ci, cj):
        d = space.norm(ci - cj)
        return d <= reach if fam.kind is Kind.CLOSED else d < reach
    d = float(space.norm(ci - cj))
    return d <= reach + tol if fam.kind is Kind.CLOSED else d < reach - 2 * tol


def _box_point(fam: BallFamily, idx, tol: float) -> Feasibility:
    # l-inf balls are boxes: intersect coordinate intervals directly
    c, r = fam.centers[idx], fam.radii[idx]
    lo = (c - r[:, None]).max(axis=0)
    hi = (c + r[:, None]).min(axis=0)
    gap = float(np.max(lo - hi))
    ok = gap <= 0 if fam.kind is Kind.CLOSED else gap < 0
    if not ok:
        return Feasibility(None, gap, 0, False)
    y = 0.5 * (lo + hi)
    ok = bool(contains_many(fam.space, c, r, fam.kind, y, tol).all())
    return Feasibility(y if ok else None, gap, 0, ok)


def common_point(fam: BallFamily, idx=None, tol: float = DEFAULT_TOL,
                 max_sweeps: int = 100_000) -> Feasibility:
    """Find a point in the intersection of the selected balls.

    Cyclic Euclidean projections onto the balls (each is convex); open balls are
    shrunk by ``2 * tol`` so the returned point is strictly inside. Stops early
    when the worst violation has stopped decreasing, which is how an empty
    intersection shows up.
    """
    idx = list(range(len(fam))) if idx is None else list(idx)
    space = fam.space
    if space.is_inf:
        return _box_point(fam, idx, tol)
    c, r = fam.centers[idx], fam.radii[idx].copy()
    if fam.kind is Kind.OPEN:
        r = r - 2 * tol
        if np.any(r <= 0):
            return Feasibility(None, math.inf, 0, False)
    target = 0.25 * tol
    y = c.mean(axis=0)
    history = []
    for sweep in range(max_sweeps + 1):
        viol = float((space.norm(c - y) - r).max())
        if viol <= target:
            ok = bool(contains_many(space, fam.centers[idx], fam.radii[idx], fam.kind, y, tol).all())
            return Feasibility(y if ok else None, viol, sweep, ok)
        history.append(viol)
        if sweep >= 200 and viol > (1 - 1e-4) * history[sweep - 100]:
            break
        for k in range(len(idx)):
            y = project_to_ball(space, c[k], r[k], y)
    return Feasibility(None, viol, sweep, False)


def intersection_graph(fam: BallFamily, tol: float = DEFAULT_TOL) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(len(fam)))
    for i, j in combinations(range(len(fam)), 2):
        if _pair_intersects(fam.space, fam, i, j, tol):
            g.add_edge(i, j)
    return g


def _pair_point(fam: BallFamily, i: int, j: int) -> np.ndarray:
    ci, cj = fam.centers[i], fam.centers[j]
    ri, rj = fam.radii[i], fam.radii[j]
    return ci + (cj - ci) * (ri / (ri + rj))


def depth(fam: BallFamily, tol: float = DEFAULT_TOL, threads: int = 1,
          max_candidates: int = 5000) -> DepthReport:
    """Largest number of balls of the family sharing a point, with a witness.

    Maximal cliques of the pairwise intersection graph are checked for a common
    point; cliques that fail are shrunk one ball at a time, level by level, so the
    first size with a verified subset is the depth.
    """
    if len(fam) > MAX_DEPTH_BALLS:
        raise InputError(f"depth is limited to {MAX_DEPTH_BALLS} balls, got {len(fam)}")
    g = intersection_graph(fam, tol)
    cliques = [tuple(sorted(c)) for c in nx.find_cliques(g)]
    by_size: dict[int, set[tuple[int, ...]]] = {}
    for cl in cliques:
        by_size.setdefault(len(cl), set()).add(cl)

    report_flags: list[str] = []
    indeterminate: list[list[int]] = []
    failed: set[tuple[int, ...]] = set()

    def check(cl):
        if len(cl) == 1:
            return Feasibility(fam.centers[cl[0]].copy(), 0.0, 0, True)
        if len(cl) == 2 and fam.kind is Kind.CLOSED:
            y = _pair_point(fam, *cl)
            ok = bool(fam.subfamily(cl).contains(y, tol).all())
            if ok:
                return Feasibility(y, 0.0, 0, True)
        return common_point(fam, cl, tol)

    size = max(by_size)
    while size >= 1:
        level = set(by_size.get(size, set()))
        for big in failed:
            if len(big) == size + 1:
                level.update(tuple(x for x in big if x != drop) for drop in big)
        failed = {f for f in failed if len(f) > size + 1}
        level = sorted(level)
        if len(level) > max_candidates:
            report_flags.append(f"candidate cap hit at size {size}; result is a lower bound")
            level = level[:max_candidates]
        if threads > 1 and len(level) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(check, level))
        else:
            results = [check(cl) for cl in level]
        for cl, res in zip(level, results):
            if res.converged:
                slack = fam.radii[list(cl)] - fam.space.norm(fam.centers[list(cl)] - res.point)
                if fam.kind is Kind.OPEN and slack.min() < 10 * tol:
                    report_flags.append("open balls meet only near their boundaries; tolerance decided membership")
                return DepthReport(size, res.point, list(cl), indeterminate=indeterminate, flags=report_flags)
            if res.sweeps >= 100_000:
                indeterminate.append(list(cl))
            failed.add(cl)
        size -= 1
    raise AssertionError("unreachable: a single ball always verifies")
