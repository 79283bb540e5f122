"""Spherical codes, strict kissing configurations and a max-min separation search."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from kissmax.besicovitch import BallFamily
from kissmax.errors import InputError, PreconditionError
from kissmax.geometry import INF, Kind, NormedSpace, min_separation

STRICT_MARGIN = 1e-6
UNIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SphericalCode:
    space: NormedSpace
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim == 1 and self.space.dimension == 1:
            v = v[:, None]
        v = self.space.check(v, "code vector")
        if v.ndim != 2 or len(v) < 1:
            raise InputError("a code needs at least one vector")
        norms = self.space.norm(v)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise InputError(f"code vectors must have norm 1 (worst {norms[np.argmax(np.abs(norms - 1))]!r})")
        object.__setattr__(self, "vectors", v)

    def __len__(self):
        return len(self.vectors)

    @cached_property
    def separation(self) -> float:
        return min_separation(self.space, self.vectors) if len(self) > 1 else INF

    def is_strict(self, margin: float = STRICT_MARGIN) -> bool:
        return self.separation > 1.0 + margin

    def to_dict(self) -> dict:
        return {
            "dimension": self.space.dimension,
            "norm": "inf" if self.space.is_inf else {"lp": self.space.p},
            "vectors": self.vectors.tolist(),
        }


def _polygon(k: int) -> np.ndarray:
    a = 2 * np.pi * np.arange(k) / k
    return np.c_[np.cos(a), np.sin(a)]


def _icosahedron() -> np.ndarray:
    phi = (1 + math.sqrt(5)) / 2
    v = []
    for s1, s2 in product((1, -1), repeat=2):
        v += [(0, s1, s2 * phi), (s1, s2 * phi, 0), (s2 * phi, 0, s1)]
    return np.array(v) / math.sqrt(1 + phi**2)


def canonical_code(name: str, d: int | None = None) -> SphericalCode:
    """PENTAGON, HEXAGON, ICOSAHEDRON, SEGMENT, or HYPERCUBE (needs ``d``)."""
    key = name.upper()
    if key == "PENTAGON":
        return SphericalCode(NormedSpace(2, 2), _polygon(5))
    if key == "HEXAGON":
        return SphericalCode(NormedSpace(2, 2), _polygon(6))
    if key == "ICOSAHEDRON":
        return SphericalCode(NormedSpace(3, 2), _icosahedron())
    if key == "SEGMENT":
        return SphericalCode(NormedSpace(1, 2), [[-1.0], [1.0]])
    if key == "HYPERCUBE":
        if d is None or d < 1:
            raise InputError("HYPERCUBE needs a dimension d >= 1")
        return SphericalCode(NormedSpace(d, INF), np.array(list(product((-1.0, 1.0), repeat=d))))
    raise InputError(f"unknown canonical code {name!r}")


def code_to_family(code: SphericalCode, margin: float = STRICT_MARGIN) -> BallFamily:
    """Closed unit balls centred at the code vectors; all of them contain the origin."""
    if len(code) > 1 and not code.is_strict(margin):
        raise PreconditionError(
            f"code separation {code.separation:.12g} is not > 1 + {margin:g}; not a strict kissing code"
        )
    return BallFamily(code.space, code.vectors.copy(), np.ones(len(code)), Kind.CLOSED)


def normalize_family(fam: BallFamily, common_point) -> SphericalCode:
    """Radially project the centers onto the unit sphere around ``common_point``.

    The separation > 1 guarantee needs an intersecting Besicovitch family with
    ``common_point`` in every ball. That is not checked here: the projection is
    defined for any point off the centers, and callers may want it regardless.
    """
    y = fam.space.check(common_point)
    x = fam.centers - y
    n = fam.space.norm(x)
    if np.any(n == 0):
        raise InputError("a center coincides with common_point")
    x = x / n.min()
    return SphericalCode(fam.space, x / fam.space.norm(x)[:, None])


# -- max-min separation search -------------------------------------------------

@dataclass(frozen=True)
class CodeSearchBudget:
    restarts: int = 32
    iterations: int = 3000
    seed: int = 0
    beta_start: float = 10.0
    beta_end: float = 1e7
    step_start: float = 0.05
    step_end: float = 1e-9
    threads: int = 1


@dataclass
class CodeSearchResult:
    code: SphericalCode
    separation: float
    strict: bool
    margin: float
    budget: CodeSearchBudget
    best_restart: int
    separations: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        b = self.budget
        return {
            "code": self.code.to_dict(),
            "separation": self.separation,
            "strict": self.strict,
            "margin": self.margin,
            "certificate": {
                "seed": b.seed,
                "restarts": b.restarts,
                "iterations": b.iterations,
                "beta_schedule": {"start": b.beta_start, "end": b.beta_end, "kind": "geometric"},
                "step_schedule": {"start": b.step_start, "end": b.step_end, "kind": "geometric"},
                "best_restart": self.best_restart,
            },
        }


def _norm_grad(space: NormedSpace, u: np.ndarray, nrm: np.ndarray) -> np.ndarray:
    """Ascent direction for the norm at each row vector of ``u``.

    The max norm is flat along every non-maximal coordinate, which strands
    subgradient ascent on plateaus; its direction is taken from the Euclidean
    norm instead.
    """
    if space.is_inf:
        return u / np.maximum(np.sqrt(np.sum(u * u, axis=-1)), 1e-300)[..., None]
    if space.p == 1.0:
        return np.sign(u)
    if space.p == 2.0:
        return u / np.maximum(nrm, 1e-300)[..., None]
    p = space.p
    return np.sign(u) * np.abs(u) ** (p - 1) / np.maximum(nrm, 1e-300)[..., None] ** (p - 1)


def _to_sphere(space: NormedSpace, X: np.ndarray) -> np.ndarray:
    if space.is_inf:
        # nearest point of the unit cube first, so coordinates can settle on +-1
        X = np.clip(X, -1.0, 1.0)
    return X / space.norm(X)[..., None]


def _run_restarts(space: NormedSpace, n: int, seeds, budget: CodeSearchBudget):
    d = space.dimension
    rngs = [np.random.default_rng(s) for s in seeds]
    X = np.stack([rng.normal(size=(n, d)) for rng in rngs])
    X = _to_sphere(space, X)
    iu, ju = np.triu_indices(n, k=1)
    R = len(rngs)
    best = np.full(R, -INF)
    best_X = X.copy()
    T = max(budget.iterations, 1)
    betas = np.geomspace(budget.beta_start, budget.beta_end, T)
    steps = np.geomspace(budget.step_start, budget.step_end, T)
    for it in range(T):
        diff = X[:, iu, :] - X[:, ju, :]
        dist = space.norm(diff)
        sep = dist.min(axis=1)
        improved = sep > best
        best = np.where(improved, sep, best)
        best_X[improved] = X[improved]
        # soft-min weights: softmax(-beta * dist), shifted for stability
        z = -betas[it] * (dist - sep[:, None])
        w = np.exp(z)
        w /= w.sum(axis=1, keepdims=True)
        g = _norm_grad(space, diff, dist) * w[..., None]
        G = np.zeros_like(X)
        np.add.at(G, (slice(None), iu), g)
        np.add.at(G, (slice(None), ju), -g)
        scale = np.abs(G).max(axis=(1, 2), keepdims=True)
        X = _to_sphere(space, X + steps[it] * G / np.maximum(scale, 1e-300))
    diff = X[:, iu, :] - X[:, ju, :]
    sep = space.norm(diff).min(axis=1)
    improved = sep > best
    best = np.where(improved, sep, best)
    best_X[improved] = X[improved]
    return best, best_X


def code_search(space: NormedSpace, n: int, budget: CodeSearchBudget | None = None,
                margin: float = STRICT_MARGIN) -> CodeSearchResult:
    """Seeded multi-restart search for n unit vectors with large minimum separation.

    Gradient ascent on a soft-min of the pairwise distances, with the soft-min
    sharpness and the step size both annealed geometrically, and a radial
    re-normalisation after every step. Only finds configurations: a separation
    below 1 + margin is not evidence that no strict code of size n exists.
    """
    budget = budget or CodeSearchBudget()
    if n < 2:
        raise InputError("code_search needs n >= 2")
    seeds = np.random.SeedSequence(budget.seed).spawn(budget.restarts)
    chunks = [c for c in np.array_split(np.arange(budget.restarts), max(1, budget.threads)) if len(c)]
    run = lambda c: _run_restarts(space, n, [seeds[i] for i in c], budget)
    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    seps = np.concatenate([p[0] for p in parts])
    Xs = np.concatenate([p[1] for p in parts])
    k = int(seps.argmax())
    code = SphericalCode(space, _to_sphere(space, Xs[k]))
    return CodeSearchResult(code, code.separation, code.is_strict(margin), margin, budget, k,
                            [float(s) for s in seps])


# -- reference values ------------------------------------------------------------

KNOWN_STRICT = {1: 2, 2: 5, 3: 12}
KNOWN_NONSTRICT = {1: 2, 2: 6, 3: 12, 4: 24, 8: 240, 24: 196560}
UNDETERMINED = {4: [22, 23, 24]}


def asymptotic_bounds(d: int) -> dict:
    """Reference values for the Besicovitch constant of Euclidean R^d.

    ``lower``/``upper`` are the asymptotic growth formulas with their 1+o(1)
    factors dropped, so they are not bounds at any particular d.
    """
    if int(d) != d or d < 1:
        raise InputError("d must be a positive integer")
    d = int(d)
    growth = (2 / math.sqrt(3)) ** d
    lower = math.sqrt(3 * math.pi / 8) * math.log(3 / (2 * math.sqrt(2))) * d**1.5 * growth
    upper = 2 ** (0.401 * d)
    out = {
        "d": d,
        "lower": lower,
        "upper": upper,
        "lebesgue_ball_lower": math.sqrt(math.pi * (d + 1)) / math.sqrt(6) * growth,
        "known_exact": KNOWN_STRICT.get(d),
        "known_candidates": UNDETERMINED.get(d),
        "known_nonstrict_kissing": KNOWN_NONSTRICT.get(d),
        "log_base": "natural",
        "caveat": "asymptotic reference, 1+o(1) factors dropped; not certified at finite d",
    }
    return out
