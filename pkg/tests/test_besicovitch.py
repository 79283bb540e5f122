from itertools import combinations

import numpy as np
import pytest

from kissmax import (
    Ball,
    BallFamily,
    InputError,
    Kind,
    NormedSpace,
    canonical_code,
    code_to_family,
    depth,
    greedy_select,
    open_closed_convert,
    validate_family,
)
from kissmax.geometry import INF

R1 = NormedSpace(1, 2)
PLANE = NormedSpace(2, 2)


def fam1(centers, radii, kind=Kind.CLOSED):
    return BallFamily(R1, np.array(centers, float)[:, None], radii, kind)


def disks_meet(c, r, tol=1e-9):
    """Closed disks share a point iff the leftmost point of their intersection exists;
    that point is a leftmost disk point or a crossing of two circles."""
    cand = [ci - [ri, 0.0] for ci, ri in zip(c, r)]
    for i, j in combinations(range(len(c)), 2):
        d = np.linalg.norm(c[j] - c[i])
        if d == 0 or d > r[i] + r[j] or d < abs(r[i] - r[j]):
            continue
        a = (r[i] ** 2 - r[j] ** 2 + d**2) / (2 * d)
        h = np.sqrt(max(r[i] ** 2 - a**2, 0.0))
        u = (c[j] - c[i]) / d
        base = c[i] + a * u
        cand += [base + h * np.array([-u[1], u[0]]), base - h * np.array([-u[1], u[0]])]
    return any(np.all(np.linalg.norm(c - y, axis=1) <= r + tol) for y in cand)


def brute_depth_disks(fam):
    n = len(fam)
    for k in range(n, 0, -1):
        for sub in combinations(range(n), k):
            if disks_meet(fam.centers[list(sub)], fam.radii[list(sub)]):
                return k
    return 0


def brute_depth_line(fam):
    lo, hi = fam.centers[:, 0] - fam.radii, fam.centers[:, 0] + fam.radii
    marks = np.sort(np.r_[lo, hi])
    probes = np.r_[marks, (marks[1:] + marks[:-1]) / 2]
    if fam.kind is Kind.CLOSED:
        return max(int(np.sum((lo <= y) & (y <= hi))) for y in probes)
    return max(int(np.sum((lo < y) & (y < hi))) for y in probes)


class TestValidate:
    def test_examples(self):
        assert validate_family(fam1([-1, 1], [1, 1])) == (True, None)
        assert validate_family(fam1([0, 1], [2, 1])) == (False, (0, 1))
        assert validate_family(code_to_family(canonical_code("PENTAGON")))[0]

    def test_boundary_center_is_violation_for_closed_only(self):
        assert not validate_family(fam1([0, 1], [1, 0.5]))[0]
        assert validate_family(fam1([0, 1], [1, 0.5], Kind.OPEN))[0]

    def test_mixed_kinds_rejected(self):
        with pytest.raises(InputError):
            BallFamily.from_balls(R1, [Ball([0], 1, Kind.OPEN), Ball([3], 1, Kind.CLOSED)])


class TestGreedy:
    def test_example(self):
        sel = greedy_select(fam1([0, 1, 5], [3, 2, 1]))
        assert sel.centers[:, 0].tolist() == [0, 5]
        assert sel.radii.tolist() == [3, 1]

    def test_besicovitch_input_kept(self):
        fam = fam1([-1, 1, 4], [1, 1.5, 0.5])
        sel = greedy_select(fam)
        assert len(sel) == 3
        assert sorted(sel.radii.tolist()) == sorted(fam.radii.tolist())

    def test_single_ball(self):
        sel = greedy_select(fam1([2], [1]))
        assert len(sel) == 1

    @pytest.mark.parametrize("p", [1.0, 2.0, INF])
    def test_postconditions(self, p, rng):
        for _ in range(200):
            sp = NormedSpace(int(rng.integers(1, 4)), p)
            n = int(rng.integers(1, 15))
            fam = BallFamily(sp, rng.uniform(-4, 4, size=(n, sp.dimension)), rng.lognormal(0, 0.7, size=n),
                             Kind.CLOSED if rng.random() < 0.6 else Kind.OPEN)
            sel = greedy_select(fam)
            assert validate_family(sel)[0]
            assert all(sel.contains(c).any() for c in fam.centers)


class TestDepth:
    def test_pentagon(self):
        rep = depth(code_to_family(canonical_code("PENTAGON")))
        assert rep.depth == 5
        assert np.linalg.norm(rep.witness_point) < 1e-6

    def test_icosahedron(self):
        assert depth(code_to_family(canonical_code("ICOSAHEDRON"))).depth == 12

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_cube_family(self, d):
        rep = depth(code_to_family(canonical_code("HYPERCUBE", d)))
        assert rep.depth == 2**d
        assert rep.flags == []

    def test_disjoint(self):
        assert depth(fam1([0, 5], [1, 1])).depth == 1

    def test_tangent_closed_vs_open(self):
        assert depth(fam1([0, 2], [1, 1])).depth == 2
        assert depth(fam1([0, 2], [1, 1], Kind.OPEN)).depth == 1

    def test_witness_lies_in_subset(self, rng):
        for _ in range(30):
            sp = NormedSpace(2, [1.0, 1.5, 2.0, 3.0][rng.integers(4)])
            fam = BallFamily(sp, rng.uniform(-2, 2, size=(8, 2)), rng.uniform(0.5, 2, size=8))
            rep = depth(fam)
            assert fam.subfamily(rep.witness_subset).contains(rep.witness_point).all()
            assert len(rep.witness_subset) == rep.depth

    @pytest.mark.parametrize("kind", [Kind.OPEN, Kind.CLOSED])
    def test_line_matches_interval_sweep(self, kind, rng):
        for _ in range(150):
            n = int(rng.integers(1, 10))
            fam = fam1(rng.uniform(-5, 5, size=n), rng.uniform(0.2, 3, size=n), kind)
            assert depth(fam).depth == brute_depth_line(fam)

    def test_disks_match_extreme_point_oracle(self, rng):
        for _ in range(80):
            n = int(rng.integers(2, 8))
            fam = BallFamily(PLANE, rng.uniform(-3, 3, size=(n, 2)), rng.uniform(0.5, 2.5, size=n))
            assert depth(fam).depth == brute_depth_disks(fam)

    def test_linf_matches_grid_scan(self, rng):
        sp = NormedSpace(2, INF)
        for _ in range(60):
            n = int(rng.integers(2, 9))
            c = rng.integers(-4, 5, size=(n, 2)).astype(float)
            r = rng.integers(1, 4, size=n).astype(float)
            fam = BallFamily(sp, c, r)
            # integer boxes: some corner of the optimal intersection is on the lattice
            grid = np.stack(np.meshgrid(np.arange(-8, 9), np.arange(-8, 9)), -1).reshape(-1, 2)
            scan = max(int(fam.contains(y).sum()) for y in grid)
            assert depth(fam).depth == scan

    def test_too_many_balls(self):
        with pytest.raises(InputError):
            depth(fam1(np.arange(70) * 10.0, np.ones(70)))

    def test_threads_give_same_depth(self, rng):
        fam = BallFamily(PLANE, rng.uniform(-2, 2, size=(10, 2)), rng.uniform(0.5, 2, size=10))
        assert depth(fam, threads=4).depth == depth(fam).depth


class TestConvert:
    def test_pentagon_closed_to_open(self):
        pent = code_to_family(canonical_code("PENTAGON"))
        op = open_closed_convert(pent, Kind.OPEN, [0, 0])
        assert op.kind is Kind.OPEN
        assert np.allclose(op.radii, 2 * np.sin(np.pi / 5))
        assert validate_family(op)[0] and depth(op).depth == 5

    def test_open_to_closed(self):
        pent = canonical_code("PENTAGON")
        op = BallFamily(PLANE, pent.vectors, np.full(5, 1.1), Kind.OPEN)
        cl = open_closed_convert(op, Kind.CLOSED, [0, 0])
        assert np.allclose(cl.radii, 1.0)

    def test_two_balls(self):
        op = open_closed_convert(fam1([-1, 1], [1, 1]), Kind.OPEN, [0])
        assert op.radii.tolist() == [2, 2]

    def test_point_not_common(self):
        with pytest.raises(InputError):
            open_closed_convert(fam1([-1, 1], [1, 1]), Kind.OPEN, [0.5])

    def test_round_trip(self, rng):
        for name in ("PENTAGON", "ICOSAHEDRON", "SEGMENT"):
            fam = code_to_family(canonical_code(name))
            y = np.zeros(fam.space.dimension)
            back = open_closed_convert(open_closed_convert(fam, Kind.OPEN, y), Kind.CLOSED, y)
            assert validate_family(back)[0]
            assert back.contains(y).all()
