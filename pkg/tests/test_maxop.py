import math

import numpy as np
import pytest

from kissmax import (
    DiscreteMeasure,
    InputError,
    Kind,
    NormedSpace,
    RadiusWindow,
    SearchBudget,
    canonical_code,
    maximal_value,
    weak_constant_search,
    weak_quotient,
)
from kissmax.geometry import INF
from kissmax.maxop import MaximalEngine

from conftest import NORMS

R1 = NormedSpace(1, 2)


def brute_maximal(mu, f, x, window, kind):
    """Supremum over radii in (s, S) of the ball average, by direct enumeration.

    The average is piecewise constant in r with breaks at the atom distances, so
    sampling every break and every midpoint between consecutive breaks (window
    ends included) visits each piece that meets the window.
    """
    d = mu.space.norm(mu.points - x)
    s, S = window.lower, window.upper
    marks = sorted(set(d.tolist()) | {s} | ({S} if S < INF else set()))
    radii = set(marks) | {(a + b) / 2 for a, b in zip(marks, marks[1:])} | {marks[-1] + 1.0}
    best = -INF
    for r in radii:
        if not (s < r < S) or r <= 0:
            continue
        inside = d <= r if kind is Kind.CLOSED else d < r
        m = mu.weights[inside].sum()
        if m > 0:
            best = max(best, float((f * mu.weights)[inside].sum() / m))
    return 0.0 if best == -INF else best


def brute_weak(mu, f, p):
    v = np.array([brute_maximal(mu, f, x, RadiusWindow(), Kind.CLOSED) for x in mu.points])
    norm = (f**p @ mu.weights) ** (1 / p)
    return max(t * mu.weights[v >= t].sum() ** (1 / p) for t in v) / norm


def hub(code, c):
    pts = np.vstack([np.zeros(code.space.dimension), code.vectors])
    return DiscreteMeasure.from_atoms(code.space, pts, [c] + [1.0] * len(code))


class TestMaximalValue:
    def test_prefix_example(self):
        mu = DiscreteMeasure.from_atoms(R1, [[0], [1], [3]], [1, 1, 2])
        assert maximal_value(mu, [1, 0, 0], [3]) == pytest.approx(0.25)

    def test_pentagon_vertex(self):
        mu = hub(canonical_code("PENTAGON"), 0.01)
        f = np.r_[100.0, np.zeros(5)]
        assert maximal_value(mu, f, mu.points[1]) == pytest.approx(1 / 1.01, rel=1e-12)

    def test_zero_function(self, rng):
        mu = DiscreteMeasure.from_atoms(NormedSpace(2, 2), rng.normal(size=(5, 2)))
        assert maximal_value(mu, np.zeros(5), [0.3, 0.1]) == 0.0

    def test_empty_window_flag(self):
        mu = DiscreteMeasure.from_atoms(R1, [[0]])
        value, empty = maximal_value(mu, [1.0], [5], RadiusWindow(0, 2), with_flag=True)
        assert value == 0.0 and empty
        value, empty = maximal_value(mu, [1.0], [5], RadiusWindow(0, 6), with_flag=True)
        assert value == 1.0 and not empty

    def test_bad_window(self):
        with pytest.raises(InputError):
            RadiusWindow(2, 1)
        with pytest.raises(InputError):
            RadiusWindow(-1, 1)

    @pytest.mark.parametrize("p", NORMS)
    @pytest.mark.parametrize("kind", [Kind.OPEN, Kind.CLOSED])
    def test_matches_brute_force(self, p, kind, rng):
        for trial in range(40):
            d = int(rng.integers(1, 4))
            sp = NormedSpace(d, p)
            n = int(rng.integers(1, 7))
            if trial % 2:
                pts = rng.integers(-2, 3, size=(n, d)).astype(float)
            else:
                pts = rng.uniform(-2, 2, size=(n, d))
            mu = DiscreteMeasure.from_atoms(sp, pts, rng.lognormal(size=n))
            f = rng.exponential(size=len(mu)) * (rng.random(len(mu)) < 0.7)
            s = float(rng.choice([0.0, rng.uniform(0, 1.5)]))
            S = float(rng.choice([INF, s + rng.uniform(0.1, 3)]))
            w = RadiusWindow(s, S)
            x = mu.points[rng.integers(len(mu))] if rng.random() < 0.5 else rng.uniform(-2, 2, size=d)
            got = maximal_value(mu, f, x, w, kind)
            assert got == pytest.approx(brute_maximal(mu, f, x, w, kind), rel=1e-12, abs=1e-15)

    def test_open_and_closed_agree(self, rng):
        for _ in range(200):
            sp = NormedSpace(int(rng.integers(1, 3)), [1.0, 2.0, INF][rng.integers(3)])
            pts = rng.integers(-3, 4, size=(6, sp.dimension)).astype(float)
            mu = DiscreteMeasure.from_atoms(sp, pts, rng.lognormal(size=6))
            f = rng.exponential(size=len(mu))
            s = float(rng.integers(0, 3))
            w = RadiusWindow(s, s + float(rng.integers(1, 4)))
            a = MaximalEngine(mu, w, Kind.OPEN).values(f)
            b = MaximalEngine(mu, w, Kind.CLOSED).values(f)
            assert np.allclose(a, b, rtol=0, atol=1e-12)

    def test_batched_values(self, rng):
        mu = DiscreteMeasure.from_atoms(NormedSpace(2, 2), rng.normal(size=(6, 2)))
        F = rng.exponential(size=(3, 4, 6))
        eng = MaximalEngine(mu)
        batch = eng.values(F)
        assert batch.shape == (3, 4, 6)
        assert np.allclose(batch[1, 2], eng.values(F[1, 2]))


class TestInvariance:
    def test_translation_and_dilation(self, rng):
        sp = NormedSpace(2, 3)
        pts = rng.normal(size=(7, 2))
        w = rng.lognormal(size=7)
        f = rng.exponential(size=7)
        base = DiscreteMeasure.from_atoms(sp, pts, w)
        moved = DiscreteMeasure.from_atoms(sp, 2.5 * pts + [4, -1], w)
        for x in rng.normal(size=(10, 2)):
            a = maximal_value(base, f, x, RadiusWindow(0.1, 1.0))
            b = maximal_value(moved, f, 2.5 * x + [4, -1], RadiusWindow(0.25, 2.5))
            assert a == pytest.approx(b, rel=1e-12)

    def test_weight_scaling(self, rng):
        sp = NormedSpace(2, 1)
        pts, w, f = rng.normal(size=(6, 2)), rng.lognormal(size=6), rng.exponential(size=6)
        a = weak_quotient(DiscreteMeasure.from_atoms(sp, pts, w), f, 1).value
        b = weak_quotient(DiscreteMeasure.from_atoms(sp, pts, 7 * w), f, 1).value
        c = weak_quotient(DiscreteMeasure.from_atoms(sp, pts, w), 3 * f, 1).value
        assert a == pytest.approx(b, rel=1e-12) and a == pytest.approx(c, rel=1e-12)


class TestWeakQuotient:
    def test_single_atom(self):
        mu = DiscreteMeasure.from_atoms(R1, [[0]], [0.25])
        assert weak_quotient(mu, [4.0], 1).value == pytest.approx(1.0)

    def test_pentagon_hub(self):
        mu = hub(canonical_code("PENTAGON"), 0.01)
        q = weak_quotient(mu, np.r_[100.0, np.zeros(5)], 1).value
        assert q == pytest.approx(5.01 / 1.01, rel=1e-12)

    def test_p2_hub_weight_one(self):
        code = canonical_code("PENTAGON")
        mu = hub(code, 1.0)
        assert weak_quotient(mu, np.r_[1.0, np.zeros(5)], 2).value >= 1.0

    def test_hypercube_p2(self):
        mu = hub(canonical_code("HYPERCUBE", 2), 1.0)
        assert weak_quotient(mu, np.r_[1.0, np.zeros(4)], 2).value == pytest.approx(math.sqrt(5) / 2, rel=1e-12)

    def test_zero_function_rejected(self):
        mu = DiscreteMeasure.from_atoms(R1, [[0]])
        with pytest.raises(InputError):
            weak_quotient(mu, [0.0], 1)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    def test_matches_brute_force(self, p, rng):
        for _ in range(30):
            sp = NormedSpace(int(rng.integers(1, 3)), [1.0, 2.0, INF][rng.integers(3)])
            n = int(rng.integers(1, 6))
            mu = DiscreteMeasure.from_atoms(sp, rng.uniform(-2, 2, size=(n, sp.dimension)), rng.lognormal(size=n))
            f = rng.exponential(size=len(mu)) + 1e-3
            assert weak_quotient(mu, f, p).value == pytest.approx(brute_weak(mu, f, p), rel=1e-12)


class TestSearch:
    def test_single_atom_exact(self):
        est = weak_constant_search(DiscreteMeasure.from_atoms(R1, [[0]]), 1)
        assert est.value == pytest.approx(1.0) and est.exact

    def test_rediscovers_hub_certificate(self):
        mu = hub(canonical_code("PENTAGON"), 0.001)
        est = weak_constant_search(mu, 1, SearchBudget(restarts=4, max_iterations=20))
        assert est.value >= 5.001 / 1.001 - 1e-12
        assert est.certificate_f[0] > 0

    def test_respects_line_cap(self, rng):
        budget = SearchBudget(restarts=4, max_iterations=30)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            sp = NormedSpace(1, [1.0, 2.0, INF][rng.integers(3)])
            mu = DiscreteMeasure.from_atoms(sp, rng.uniform(-3, 3, size=(n, 1)), rng.lognormal(0, 1.5, size=n))
            assert weak_constant_search(mu, 1, budget).value <= 2 + 1e-6

    def test_respects_plane_cap(self, rng):
        budget = SearchBudget(restarts=4, max_iterations=30)
        for _ in range(10):
            n = int(rng.integers(2, 9))
            mu = DiscreteMeasure.from_atoms(NormedSpace(2, 2), rng.normal(size=(n, 2)), rng.lognormal(0, 1.5, size=n))
            assert weak_constant_search(mu, 1, budget).value <= 5 + 1e-6

    def test_certificate_reproduces(self, rng):
        mu = DiscreteMeasure.from_atoms(NormedSpace(2, 1), rng.normal(size=(15, 2)), rng.lognormal(size=15))
        est = weak_constant_search(mu, 2, SearchBudget(restarts=6, max_iterations=40, seed=3))
        assert not est.exact
        again = weak_quotient(mu, est.certificate_f, 2)
        assert again.value == pytest.approx(est.value, rel=1e-12)
        assert est.to_dict()["seed"] == 3

    def test_deterministic_and_thread_independent(self, rng):
        mu = DiscreteMeasure.from_atoms(NormedSpace(2, 2), rng.normal(size=(14, 2)), rng.lognormal(size=14))
        a = weak_constant_search(mu, 1, SearchBudget(restarts=6, max_iterations=30, seed=5, threads=1))
        b = weak_constant_search(mu, 1, SearchBudget(restarts=6, max_iterations=30, seed=5, threads=3))
        assert a.value == b.value
        assert np.array_equal(a.certificate_f, b.certificate_f)

    def test_bad_exponent(self):
        with pytest.raises(InputError):
            weak_constant_search(DiscreteMeasure.from_atoms(R1, [[0]]), 0.5)
