"""
Tests for hyperbolic-cross enumeration and the cardinality bounds.

The enumerator is checked against an independent vectorized box scan; the
three bounds are checked against worked closed-form values and against the
brute-force cardinality over random parameter draws.
"""

import math

import numpy as np
import pytest

from medlattice import (
    FrequencyIndex,
    ProductWeights,
    SmoothnessParams,
    bound_basic,
    bound_min_q,
    bound_refined,
    corollary_cap,
    enumerate_hyperbolic_cross,
)
from medlattice.index_set import PartialZetaSum, read_indices_csv, write_indices_csv


def box_scan(L, params, weights):
    """Independent enumeration: scan the box {-floor(L)..floor(L)}^d.

    Every admissible h has |h_j| <= L * gamma_j^(1/(2 alpha)) <= L, so the
    box is large enough.  Uses the product form of the membership predicate
    directly on a numpy grid, with none of the package's recursion.
    """
    if L < 1.0:
        return set()
    R = int(L)
    gammas = np.asarray(weights.require(params.dim))
    axes = np.arange(-R, R + 1)
    grids = np.meshgrid(*([axes] * params.dim), indexing="ij")
    hs = np.stack([g.ravel() for g in grids], axis=1)
    scaled = np.abs(hs) * gammas ** (-1.0 / (2.0 * params.alpha))
    prod = np.where(hs != 0, scaled, 1.0).prod(axis=1)
    keep = hs[prod <= L * (1.0 + 1e-12)]
    return {tuple(int(v) for v in row) for row in keep}


def random_draws(count, seed=20240811):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        d = int(rng.integers(1, 4))
        alpha = float(rng.uniform(0.6, 3.0))
        gammas = np.sort(rng.uniform(0.05, 1.0, size=d))[::-1]
        L = float(rng.uniform(1.0, 12.0))
        yield SmoothnessParams(alpha, d), ProductWeights(gammas), L


class TestEnumerate:
    def test_one_dimensional_interval(self):
        """d=1, unit weight: the set is just {-floor(L)..floor(L)}."""
        p = SmoothnessParams(1.5, 1)
        w = ProductWeights([1.0])
        cross = enumerate_hyperbolic_cross(2.5, p, w)
        assert [tuple(h) for h in cross.indices] == [(-2,), (-1,), (0,), (1,), (2,)]
        assert len(cross) == 5

    def test_unit_level_two_dimensional(self):
        p = SmoothnessParams(1.0, 2)
        w = ProductWeights([1.0, 1.0])
        cross = enumerate_hyperbolic_cross(1.0, p, w)
        assert len(cross) == 9
        assert {tuple(h) for h in cross} == {(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)}

    def test_level_two_cardinality(self):
        p = SmoothnessParams(2.0, 2)
        w = ProductWeights([1.0, 1.0])
        cross = enumerate_hyperbolic_cross(2.0, p, w)
        assert len(cross) == 21
        assert {tuple(h) for h in cross} == box_scan(2.0, p, w)

    def test_below_one_is_empty(self):
        p = SmoothnessParams(1.0, 2)
        w = ProductWeights([1.0, 1.0])
        assert len(enumerate_hyperbolic_cross(0.999, p, w)) == 0
        assert len(enumerate_hyperbolic_cross(0.0, p, w)) == 0

    def test_membership_lookup(self):
        p = SmoothnessParams(1.0, 2)
        w = ProductWeights([1.0, 0.5])
        cross = enumerate_hyperbolic_cross(3.0, p, w)
        assert FrequencyIndex([0, 0]) in cross
        assert (0, 0) in cross
        for h in cross:
            assert -h in cross
        assert (50, 50) not in cross

    def test_matches_box_scan(self):
        for p, w, L in random_draws(50):
            got = {tuple(h) for h in enumerate_hyperbolic_cross(L, p, w)}
            assert got == box_scan(L, p, w), f"mismatch at d={p.dim} alpha={p.alpha} L={L}"

    def test_symmetric_and_odd(self):
        for p, w, L in random_draws(20, seed=3):
            cross = enumerate_hyperbolic_cross(L, p, w)
            members = {tuple(h) for h in cross}
            assert all(tuple(-c for c in h) in members for h in members)
            assert len(cross) % 2 == 1

    def test_nesting(self):
        p = SmoothnessParams(1.1, 2)
        w = ProductWeights([1.0, 0.3])
        smaller, larger = None, None
        for L in (1.0, 2.0, 4.0, 8.0):
            larger = {tuple(h) for h in enumerate_hyperbolic_cross(L, p, w)}
            if smaller is not None:
                assert smaller <= larger
            smaller = larger

    def test_lexicographic_order(self):
        p = SmoothnessParams(0.8, 3)
        w = ProductWeights([1.0, 0.6, 0.4])
        cross = enumerate_hyperbolic_cross(4.0, p, w)
        comps = [tuple(h) for h in cross.indices]
        assert comps == sorted(comps)
        assert len(set(comps)) == len(comps)

    def test_cardinality_cap(self):
        p = SmoothnessParams(1.0, 2)
        w = ProductWeights([1.0, 1.0])
        with pytest.raises(ValueError, match="cap"):
            enumerate_hyperbolic_cross(200.0, p, w, cap=10)

    def test_weights_must_cover_dim(self):
        p = SmoothnessParams(1.0, 3)
        w = ProductWeights([1.0, 1.0])
        with pytest.raises(ValueError):
            enumerate_hyperbolic_cross(2.0, p, w)


class TestBoundBasic:
    def test_closed_form_at_L_equals_e(self):
        """d=1, gamma=1, tau=1, L=e collapses to 1 + (5/2) e^2."""
        p = SmoothnessParams(1.0, 1)
        w = ProductWeights([1.0])
        got = bound_basic(math.e, 1.0, p, w)
        assert got == pytest.approx(1.0 + 2.5 * math.e**2, rel=1e-12)

    def test_log_term_vanishes_at_L_equals_one(self):
        """L=1: the bound is 1 + e^(1/tau) * prod(1 + 2 gamma_j^(1/(2 alpha)))."""
        p = SmoothnessParams(1.0, 2)
        w = ProductWeights([1.0, 0.25])
        got = bound_basic(1.0, 1.0, p, w)
        expected = 1.0 + math.e * (1.0 + 2.0) * (1.0 + 2.0 * 0.5)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_dual_evaluation(self):
        """Cross-check against a direct product-form evaluation."""
        p = SmoothnessParams(1.5, 2)
        w = ProductWeights([1.0, 1.0])
        tau, L = 0.5, 10.0
        factor = 1.0
        for g in w.require(2):
            factor *= 1.0 + 2.0 * g ** (1.0 / (2.0 * p.alpha)) * (1.0 + tau * math.log(L))
        expected = 1.0 + L * math.exp(1.0 / tau) / (1.0 + tau * math.log(L)) * factor
        got = bound_basic(L, tau, p, w)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(966.7501502805170, rel=1e-9)

    def test_domain(self):
        p = SmoothnessParams(1.0, 1)
        w = ProductWeights([1.0])
        with pytest.raises(ValueError):
            bound_basic(0.5, 1.0, p, w)
        with pytest.raises(ValueError):
            bound_basic(2.0, 0.0, p, w)


class TestBoundMinQ:
    def test_single_point_grid_closed_form(self):
        p = SmoothnessParams(1.0, 1)
        w = ProductWeights([1.0])
        zeta2 = math.pi**2 / 6.0
        got = bound_min_q(5.0, p, w, q_grid=[2.0])
        expected = 1.0 + 25.0 / zeta2 * (1.0 + 2.0 * zeta2)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(66.198, abs=5e-4)

    def test_at_L_equals_one(self):
        p = SmoothnessParams(1.0, 1)
        w = ProductWeights([1.0])
        got = bound_min_q(1.0, p, w, q_grid=[2.0])
        assert got == pytest.approx(3.0 + 6.0 / math.pi**2, rel=1e-12)

    def test_grid_minimum(self):
        p = SmoothnessParams(1.2, 2)
        w = ProductWeights([1.0, 0.5])
        grid = (1.1, 1.5, 2.0, 3.0)
        combined = bound_min_q(6.0, p, w, q_grid=grid)
        singles = [bound_min_q(6.0, p, w, q_grid=[q]) for q in grid]
        assert combined == pytest.approx(min(singles), rel=1e-14)
        assert all(combined <= s + 1e-12 for s in singles)

    def test_rejects_bad_grid(self):
        p = SmoothnessParams(1.0, 1)
        w = ProductWeights([1.0])
        with pytest.raises(ValueError):
            bound_min_q(5.0, p, w, q_grid=[1.0])
        with pytest.raises(ValueError):
            bound_min_q(5.0, p, w, q_grid=[])


class TestBoundRefined:
    def test_unit_weight_one_dimensional(self):
        """gamma^(1/(2 alpha)) * L > 1 puts the minimizer at q = 1."""
        p = SmoothnessParams(1.0, 1)
        w = ProductWeights([1.0])
        H10 = math.fsum(1.0 / n for n in range(1, 11))
        assert H10 == pytest.approx(2.9289682539682538, rel=1e-15)
        expected = 1.0 + 10.0 / H10 * (1.0 + 2.0 * H10)
        got = bound_refined(10.0, p, w)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(24.414, abs=5e-4)

    def test_dominates_brute_force(self):
        for p, w, L in random_draws(30, seed=11):
            if L < 2.0:
                continue
            count = len(enumerate_hyperbolic_cross(L, p, w))
            assert count <= bound_refined(L, p, w) + 1e-9

    def test_monotone_in_L(self):
        p = SmoothnessParams(1.3, 2)
        w = ProductWeights([1.0, 0.4])
        vals = [bound_refined(L, p, w) for L in (2.0, 3.0, 5.0, 9.0, 17.0, 33.0)]
        assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))

    def test_small_weight_degenerate_branch(self):
        # gamma^(1/(2 alpha)) * L <= 1: endpoint fallback must still dominate
        p = SmoothnessParams(0.6, 1)
        w = ProductWeights([0.1])
        L = 2.0
        count = len(enumerate_hyperbolic_cross(L, p, w))
        assert count <= bound_refined(L, p, w) + 1e-9

    def test_domain(self):
        p = SmoothnessParams(1.0, 1)
        w = ProductWeights([1.0])
        with pytest.raises(ValueError):
            bound_refined(1.5, p, w)


class TestCorollaryCap:
    def test_level_one(self):
        assert corollary_cap(101, 1.0, 1.0) == pytest.approx(101.0, rel=1e-15)

    def test_level_e(self):
        assert corollary_cap(101, 1.0, math.e) == pytest.approx(51.0, rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            corollary_cap(101, 1.0, 0.9)
        with pytest.raises(ValueError):
            corollary_cap(100, 1.0, 2.0)
        with pytest.raises(ValueError):
            corollary_cap(101, 0.0, 2.0)

    def test_caps_enumeration(self):
        p = SmoothnessParams(1.5, 2)
        w = ProductWeights([1.0, 1.0])
        for N, tau, N_star in ((101, 1.0, 3.0), (863, 0.67, 1.33), (10903, 0.62, 9.0)):
            count = len(enumerate_hyperbolic_cross(N_star, p, w))
            assert count <= corollary_cap(N, tau, N_star) + 1e-9


class TestBoundsDominateCardinality:
    """All three bounds sit above the brute-force count on random draws."""

    def test_all_bounds(self):
        for p, w, L in random_draws(50, seed=5):
            count = len(box_scan(L, p, w))
            for tau in (0.1, 0.5, 1.0, 2.0):
                assert count <= bound_basic(L, tau, p, w) + 1e-9
            assert count <= bound_min_q(L, p, w) + 1e-9
            if L >= 2.0:
                assert count <= bound_refined(L, p, w) + 1e-9


class TestPartialZetaSum:
    def test_harmonic_numbers(self):
        assert PartialZetaSum.of(10.0, 1.0).value == pytest.approx(2.9289682539682538, rel=1e-15)
        assert PartialZetaSum.of(10.9, 1.0).value == pytest.approx(2.9289682539682538, rel=1e-15)

    def test_quadratic_partial_sum(self):
        direct = math.fsum(1.0 / n**2 for n in range(1, 8))
        assert PartialZetaSum.of(7.0, 2.0).value == pytest.approx(direct, rel=1e-15)

    def test_domain(self):
        with pytest.raises(ValueError):
            PartialZetaSum.of(0.5, 1.0)
        with pytest.raises(ValueError):
            PartialZetaSum.of(5.0, 0.5)


class TestIndexCsv:
    def test_round_trip(self, tmp_path):
        p = SmoothnessParams(1.2, 2)
        w = ProductWeights([1.0, 0.5])
        cross = enumerate_hyperbolic_cross(4.0, p, w)
        path = tmp_path / "indices.csv"
        write_indices_csv(cross, path)
        back = read_indices_csv(path)
        assert back == list(cross.indices)

    def test_format(self, tmp_path):
        p = SmoothnessParams(1.0, 2)
        w = ProductWeights([1.0, 1.0])
        cross = enumerate_hyperbolic_cross(1.0, p, w)
        path = tmp_path / "indices.csv"
        write_indices_csv(cross, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == "h_1,h_2"
        assert lines[1] == "-1,-1"
        assert len(lines) == 10

    def test_rejects_foreign_csv(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_indices_csv(path)
