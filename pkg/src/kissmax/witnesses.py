"""Explicit extremal measures built from strict kissing codes, and the constants
that go with them (extrapolation from weak (p,p) to weak (1,1), interpolation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from kissmax.codes import STRICT_MARGIN, SphericalCode
from kissmax.errors import InputError, PreconditionError
from kissmax.maxop import MaximalEngine, WeakTypeEstimate, weak_quotient
from kissmax.measure import DiscreteMeasure, l_norm

PACKAGE_TOL = 1e-9


@dataclass
class WitnessPackage:
    measure: DiscreteMeasure
    function: np.ndarray
    p: float
    predicted_quotient: float
    computed: WeakTypeEstimate
    provenance: dict = field(default_factory=dict)

    @property
    def delivers(self) -> bool:
        return self.computed.value >= self.predicted_quotient - PACKAGE_TOL

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "predicted_quotient": self.predicted_quotient,
            "computed": self.computed.to_dict(),
            "delivers_prediction": self.delivers,
            "measure": {
                "dimension": self.measure.space.dimension,
                "norm": "inf" if self.measure.space.is_inf else {"lp": self.measure.space.p},
                "atoms": [
                    {"point": pt.tolist(), "weight": float(w)}
                    for pt, w in zip(self.measure.points, self.measure.weights)
                ],
            },
            "function": [float(v) for v in self.function],
            "provenance": self.provenance,
        }


def _require_strict(code: SphericalCode, margin: float):
    if len(code) > 1 and not code.is_strict(margin):
        raise PreconditionError(f"code separation {code.separation:.12g} is not > 1 + {margin:g}")


def _hub_measure(code: SphericalCode, c: float) -> DiscreteMeasure:
    # atom 0 is the hub (origin) with weight c, then one unit atom per code vector
    pts = np.vstack([np.zeros(code.space.dimension), code.vectors])
    return DiscreteMeasure.from_atoms(code.space, pts, np.r_[c, np.ones(len(code))])


def witness_weak11(code: SphericalCode, c=Fraction(1, 100), margin: float = STRICT_MARGIN) -> WitnessPackage:
    """c*delta_0 + sum of unit masses on the code, tested with f = 1/c at the origin.

    ``c`` may be a Fraction or a decimal string so that c and 1/c are recorded exactly.
    """
    _require_strict(code, margin)
    c_exact = Fraction(c) if not isinstance(c, float) else Fraction(c).limit_denominator(10**12)
    if c_exact <= 0:
        raise InputError("c must be positive")
    c_val, c_inv = float(c_exact), float(1 / c_exact)
    mu = _hub_measure(code, c_val)
    f = np.zeros(len(mu))
    f[0] = c_inv
    k = len(code)
    predicted = float((k + c_exact) / (1 + c_exact))
    est = weak_quotient(mu, f, 1.0)
    prov = {"construction": "weak11", "code_size": k, "c": str(c_exact), "c_inverse": str(1 / c_exact),
            "code_separation": code.separation}
    return WitnessPackage(mu, f, 1.0, predicted, est, prov)


def weakpp_prediction(k: int, p: float) -> float:
    return (p - 1) ** ((p - 1) / p) * (k + p - 1) ** (1 / p) / p


def witness_weakpp(code: SphericalCode, p: float, margin: float = STRICT_MARGIN) -> WitnessPackage:
    """Weak (p,p) witness: hub weight c = p - 1 (the optimal choice), f = 1 at the hub."""
    if not p > 1:
        raise InputError(f"witness_weakpp needs p > 1, got {p}")
    _require_strict(code, margin)
    c = p - 1
    mu = _hub_measure(code, c)
    f = np.zeros(len(mu))
    f[0] = 1.0
    est = weak_quotient(mu, f, p)
    prov = {"construction": "weakpp", "code_size": len(code), "c": c, "p": p, "code_separation": code.separation}
    return WitnessPackage(mu, f, p, weakpp_prediction(len(code), p), est, prov)


def attainment_measure(code: SphericalCode, n_max: int, margin: float = STRICT_MARGIN) -> list[WitnessPackage]:
    """Blocks 1/n*delta_{g n e1} + sum_i delta_{x_i + g n e1} for n = 1..n_max.

    One package per block, each evaluated on the whole truncated measure with f
    the indicator of that block's light atom; block n gives (nK + 1)/(n + 1).
    The computed weak quotient is a max over all levels, so it can exceed the
    prediction when K is small and other blocks join a lower level set; the
    quotient at the block's own level 1/(n+1) is reported separately and equals
    the prediction. The spacing g is 3 unless that leaves atoms of neighbouring blocks within
    distance 1 of each other (codes containing +-e1 do), in which case g = 4.
    """
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    _require_strict(code, margin)
    d, k = code.space.dimension, len(code)
    e1 = np.zeros(d)
    e1[0] = 1.0
    block = np.vstack([np.zeros(d), code.vectors])
    gap = 3
    cross = code.space.norm(block[:, None, :] + gap * e1 - block[None, :, :])
    if cross.min() <= 1 + PACKAGE_TOL:
        gap = 4
    pts, wts, light = [], [], []
    for n in range(1, n_max + 1):
        shift = gap * n * e1
        light.append(len(pts))
        pts.append(shift)
        wts.append(1.0 / n)
        pts.extend(code.vectors + shift)
        wts.extend([1.0] * k)
    mu = DiscreteMeasure.from_atoms(code.space, np.array(pts), np.array(wts))
    if len(mu) != len(pts):
        raise PreconditionError("blocks overlap; code vectors must lie on the unit sphere")
    engine = MaximalEngine(mu)
    out = []
    for n, atom in enumerate(light, start=1):
        f = np.zeros(len(mu))
        f[atom] = 1.0
        est = weak_quotient(mu, f, 1.0, engine)
        t = 1.0 / (n + 1)
        level = float(mu.weights[engine.values(f) >= t * (1 - 1e-12)].sum())
        prov = {"construction": "attainment", "block": n, "n_max": n_max, "code_size": k, "spacing": gap,
                "block_level": t, "block_level_quotient": t * level / l_norm(mu, f, 1.0)}
        out.append(WitnessPackage(mu, f, 1.0, (n * k + 1) / (n + 1), est, prov))
    return out


def extrapolation_constant(p: float, N: float) -> int:
    """floor(p^p (p-1)^(1-p) N^p): weak (1,1) constant implied by a weak (p,p) bound N."""
    if not p > 1 or not N >= 1:
        raise InputError(f"extrapolation_constant needs p > 1 and N >= 1, got p={p}, N={N}")
    if float(p).is_integer():
        pi = int(p)
        value = Fraction(pi) ** pi * Fraction(pi - 1) ** (1 - pi) * Fraction(N) ** pi
        return math.floor(value)
    with mpmath.workdps(60):
        pm, nm = mpmath.mpf(p), mpmath.mpf(N)
        return int(mpmath.floor(pm**pm * (pm - 1) ** (1 - pm) * nm**pm))


def interpolation_bound(p: float, N: float) -> float:
    """Strong (p,p) bound p^2 N / (p-1)^(2-1/p) obtained from a weak (p,p) bound N."""
    if not p > 1 or not N >= 1:
        raise InputError(f"interpolation_bound needs p > 1 and N >= 1, got p={p}, N={N}")
    return p * p * N / (p - 1) ** (2 - 1 / p)
