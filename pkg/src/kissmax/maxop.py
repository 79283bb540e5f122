"""Exact centered maximal operator for discrete measures, and weak-type quotients.

For a finitely supported measure the average of f over B(x, r) only changes
when r crosses a distance from x to an atom. Sorting the atoms by distance and
grouping ties therefore reduces the supremum over radii to a maximum over the
prefix groups, which is what :class:`MaximalEngine` evaluates (vectorised over
centers and over batches of functions).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from kissmax.errors import InputError
from kissmax.geometry import INF, Kind
from kissmax.measure import DiscreteMeasure, l_norm

TIE_TOL = 1e-12


@dataclass(frozen=True)
class RadiusWindow:
    """Open interval (lower, upper) of admissible radii."""

    lower: float = 0.0
    upper: float = INF

    def __post_init__(self):
        if not (0 <= self.lower < self.upper):
            raise InputError(f"radius window needs 0 <= lower < upper, got ({self.lower}, {self.upper})")


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 64
    max_iterations: int = 200
    seed: int = 0
    exhaustive_threshold: int = 12
    threads: int = 1


@dataclass
class WeakTypeEstimate:
    """Lower bound on the weak (p,p) norm of M_mu with the (f, t) that realise it.

    ``value == t * mu{Mf >= t}**(1/p) / ||f||_p``; the level set uses ``>=`` because
    the supremum over thresholds s < t of s * mu{Mf > s}**(1/p) tends to it.
    ``exact`` means every indicator function was enumerated, not that the true
    supremum over all f was found.
    """

    value: float
    certificate_f: np.ndarray
    certificate_t: float
    exact: bool
    p: float = 1.0
    method: str = "quotient"
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "p": self.p,
            "certificate_f": [float(v) for v in self.certificate_f],
            "certificate_t": self.certificate_t,
            "exact": self.exact,
            "method": self.method,
            "seed": self.seed,
        }


class MaximalEngine:
    """Precomputed distance orders for evaluating M f at a fixed set of centers."""

    def __init__(self, mu: DiscreteMeasure, window: RadiusWindow | None = None,
                 kind: Kind = Kind.CLOSED, centers=None, tie_tol: float = TIE_TOL):
        self.mu = mu
        self.window = window or RadiusWindow()
        self.kind = kind
        if centers is None:
            centers = mu.points
        centers = mu.space.check(np.atleast_2d(np.asarray(centers, dtype=float)), "center")
        self.centers = centers
        dist = mu.space.norm(centers[:, None, :] - mu.points[None, :, :])
        self.order = np.argsort(dist, axis=1, kind="stable")
        ds = np.take_along_axis(dist, self.order, axis=1)
        n = ds.shape[1]
        nxt = np.full_like(ds, INF)
        nxt[:, :-1] = ds[:, 1:]
        # consecutive distances closer than tie_tol belong to one group
        ends = np.ones_like(ds, dtype=bool)
        if n > 1:
            ends[:, :-1] = (ds[:, 1:] - ds[:, :-1]) > tie_tol * np.maximum(1.0, ds[:, 1:])
        # Prefix ending at a group with distance d and next distance d' is the ball
        # for r in [d, d') (closed) or (d, d'] (open); both meet (s, S) iff d < S, d' > s.
        self.admissible = ends & (ds < self.window.upper) & (nxt > self.window.lower)
        self.mass = np.cumsum(mu.weights[self.order], axis=1)
        self.empty = ~self.admissible.any(axis=1)

    def values(self, f) -> np.ndarray:
        """M f at every center; ``f`` may carry leading batch axes."""
        f = self.mu.check_function(f)
        fw = f * self.mu.weights
        cs = np.cumsum(fw[..., self.order], axis=-1)
        avg = np.where(self.admissible, cs / self.mass, -INF)
        out = avg.max(axis=-1)
        return np.where(self.empty, 0.0, out)


def maximal_value(mu: DiscreteMeasure, f, x, window: RadiusWindow | None = None,
                  kind: Kind = Kind.CLOSED, with_flag: bool = False):
    """Centered maximal function of ``f`` at ``x`` restricted to radii in ``window``.

    Returns 0 when no admissible ball has positive mass; ``with_flag=True`` returns
    ``(value, empty)`` so callers can tell that case apart.
    """
    x = mu.space.check(x)
    eng = MaximalEngine(mu, window, kind, centers=x[None, :])
    value = float(eng.values(f)[0])
    return (value, bool(eng.empty[0])) if with_flag else value


def _level_quotients(values: np.ndarray, weights: np.ndarray, p: float, norms: np.ndarray):
    """Best t * mu{v >= t}^(1/p) / norm per row of ``values``; returns (q, t)."""
    idx = np.argsort(-values, axis=-1, kind="stable")
    vs = np.take_along_axis(values, idx, axis=-1)
    cum = np.cumsum(weights[idx], axis=-1)
    q = vs * cum ** (1.0 / p)
    k = q.argmax(axis=-1)
    best = np.take_along_axis(q, k[..., None], axis=-1)[..., 0]
    t = np.take_along_axis(vs, k[..., None], axis=-1)[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(norms > 0, best / norms, -INF)
    return out, t


def weak_quotient(mu: DiscreteMeasure, f, p: float = 1.0, engine: MaximalEngine | None = None) -> WeakTypeEstimate:
    f = mu.check_function(f)
    norm = l_norm(mu, f, p)
    if norm <= 0:
        raise InputError("weak quotient needs a function with positive norm")
    engine = engine or MaximalEngine(mu)
    v = engine.values(f)
    q, t = _level_quotients(v[None, :], mu.weights, p, np.array([norm]))
    return WeakTypeEstimate(float(q[0]), f.copy(), float(t[0]), exact=False, p=p)


class _Evaluator:
    def __init__(self, mu: DiscreteMeasure, p: float):
        self.mu, self.p = mu, p
        self.engine = MaximalEngine(mu)

    def __call__(self, F: np.ndarray):
        norms = (F**self.p @ self.mu.weights) ** (1.0 / self.p)
        v = self.engine.values(F)
        return _level_quotients(v, self.mu.weights, self.p, norms)


def _ascent(evaluate: _Evaluator, seeds: list[np.random.SeedSequence], iterations: int):
    """Randomised coordinate ascent; one independent generator per restart."""
    n = len(evaluate.mu)
    rngs = [np.random.default_rng(s) for s in seeds]
    F = np.empty((len(rngs), n))
    for r, rng in enumerate(rngs):
        f = rng.exponential(size=n) * (rng.random(n) < rng.uniform(0.2, 1.0))
        if not f.any():
            f[rng.integers(n)] = 1.0
        F[r] = f
    q, _ = evaluate(F)
    n_cand = 8
    for _ in range(iterations):
        cand = np.repeat(F[:, None, :], n_cand, axis=1)
        for r, rng in enumerate(rngs):
            i = rng.integers(n)
            fi, top = F[r, i], F[r].max()
            cand[r, :, i] = [0.0, 0.5 * fi, 2.0 * fi, fi + rng.exponential() * top, top,
                             rng.exponential() * top, 10.0 * top, 0.1 * top]
        qc, _ = evaluate(cand.reshape(-1, n))
        qc = qc.reshape(len(rngs), n_cand)
        j = qc.argmax(axis=1)
        better = qc[np.arange(len(rngs)), j] > q * (1 + 1e-15)
        F[better] = cand[better, j[better]]
        q = np.where(better, qc[np.arange(len(rngs)), j], q)
    return q, F


def weak_constant_search(mu: DiscreteMeasure, p: float = 1.0, budget: SearchBudget | None = None) -> WeakTypeEstimate:
    """Certified lower bound on the weak (p,p) norm of M_mu.

    Tries every single-atom indicator, every subset indicator when the measure is
    small enough, then seeded random coordinate ascent. Results depend only on
    ``budget.seed`` and ``budget.restarts``, never on ``budget.threads``.
    """
    budget = budget or SearchBudget()
    n = len(mu)
    if n == 0:
        raise InputError("weak_constant_search needs a nonempty measure")
    if not p >= 1:
        raise InputError(f"exponent must be >= 1, got {p}")
    evaluate = _Evaluator(mu, p)

    candidates: list[tuple[float, np.ndarray, str]] = []

    def keep(F, method):
        q, _ = evaluate(F)
        k = int(q.argmax())
        candidates.append((float(q[k]), F[k].copy(), method))

    keep(np.eye(n), "single-atom")
    exact = n <= budget.exhaustive_threshold
    if exact:
        masks = np.arange(1, 2**n)
        bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
        for start in range(0, len(bits), 4096):
            keep(bits[start:start + 4096], "indicator-enumeration")

    if budget.restarts > 0 and budget.max_iterations >= 0:
        seeds = np.random.SeedSequence(budget.seed).spawn(budget.restarts)
        chunks = np.array_split(np.arange(budget.restarts), max(1, min(budget.threads, budget.restarts)))
        chunks = [c for c in chunks if len(c)]
        run = lambda c: _ascent(evaluate, [seeds[i] for i in c], budget.max_iterations)
        if len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                results = list(pool.map(run, chunks))
        else:
            results = [run(c) for c in chunks]
        q = np.concatenate([r[0] for r in results])
        F = np.concatenate([r[1] for r in results])
        k = int(q.argmax())
        candidates.append((float(q[k]), F[k].copy(), "coordinate-ascent"))

    value, f, method = max(candidates, key=lambda c: c[0])  # first wins on ties
    est = weak_quotient(mu, f, p, evaluate.engine)
    est.exact = exact
    est.method = method
    est.seed = budget.seed
    if not math.isclose(est.value, value, rel_tol=1e-9, abs_tol=0.0):
        raise RuntimeError(f"certificate does not reproduce: {est.value} vs {value}")
    return est
