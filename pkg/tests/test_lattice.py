"""
Tests for rank-1 lattice sampling: seeded draws, the shifted-lattice
coefficient estimator, and dual-lattice membership.
"""

import math

import numpy as np
import pytest
from scipy import stats

from medlattice import (
    FrequencyIndex,
    GeneratingVector,
    LatticeConfig,
    RandomShift,
    draw_generating_vector,
    draw_shift,
    dual_membership,
    estimate_coefficients,
    rng_stream,
)
from medlattice.lattice import PURPOSE_GENVEC, PURPOSE_SHIFT, roots_of_unity


class TestStreams:
    def test_determinism(self):
        a = rng_stream(12345, 3, PURPOSE_GENVEC).integers(0, 2**63, size=8)
        b = rng_stream(12345, 3, PURPOSE_GENVEC).integers(0, 2**63, size=8)
        assert np.array_equal(a, b)

    def test_distinct_keys_differ(self):
        base = rng_stream(12345, 3, PURPOSE_GENVEC).integers(0, 2**63, size=8)
        for key in ((12345, 4, PURPOSE_GENVEC), (12345, 3, PURPOSE_SHIFT), (12346, 3, PURPOSE_GENVEC)):
            other = rng_stream(*key).integers(0, 2**63, size=8)
            assert not np.array_equal(base, other)

    def test_rejects_negative_keys(self):
        with pytest.raises(ValueError):
            rng_stream(-1, 0, 0)
        with pytest.raises(ValueError):
            rng_stream(0, -1, 0)


class TestDrawGeneratingVector:
    def test_singleton_support(self):
        """N=2 leaves only z_j = 1."""
        config = LatticeConfig(2, 4)
        z = draw_generating_vector(config, rng_stream(5, 0, PURPOSE_GENVEC))
        assert z.z == (1, 1, 1, 1)

    def test_range(self):
        config = LatticeConfig(101, 3)
        rng = rng_stream(5, 0, PURPOSE_GENVEC)
        for _ in range(200):
            z = draw_generating_vector(config, rng)
            assert all(1 <= v <= 100 for v in z.z)

    def test_deterministic(self):
        config = LatticeConfig(1009, 2)
        z1 = draw_generating_vector(config, rng_stream(77, 4, PURPOSE_GENVEC))
        z2 = draw_generating_vector(config, rng_stream(77, 4, PURPOSE_GENVEC))
        assert z1.z == z2.z

    def test_chi_square_uniformity(self):
        """10^5 draws per component, chi-square on {1..100} at significance 1e-3."""
        config = LatticeConfig(101, 2)
        rng = rng_stream(2024, 0, PURPOSE_GENVEC)
        draws = np.array([draw_generating_vector(config, rng).z for _ in range(100_000)])
        for j in range(2):
            counts = np.bincount(draws[:, j], minlength=101)[1:]
            expected = 100_000 / 100.0
            chi2 = float(((counts - expected) ** 2 / expected).sum())
            p = stats.chi2.sf(chi2, df=99)
            assert p > 1e-3, f"component {j}: chi2={chi2:.1f}, p={p:.2e}"


class TestDrawShift:
    def test_range_and_determinism(self):
        config = LatticeConfig(101, 5)
        d1 = draw_shift(config, rng_stream(9, 1, PURPOSE_SHIFT))
        d2 = draw_shift(config, rng_stream(9, 1, PURPOSE_SHIFT))
        assert d1.delta == d2.delta
        assert all(0.0 <= v < 1.0 for v in d1.delta)

    def test_kolmogorov_smirnov_uniformity(self):
        config = LatticeConfig(101, 2)
        rng = rng_stream(2025, 0, PURPOSE_SHIFT)
        draws = np.array([draw_shift(config, rng).delta for _ in range(100_000)])
        for j in range(2):
            p = stats.kstest(draws[:, j], "uniform").pvalue
            assert p > 1e-3, f"component {j}: KS p={p:.2e}"


class TestRootsOfUnity:
    @pytest.mark.parametrize("N", [1, 2, 5, 101, 1024, 1619, 4099])
    def test_against_direct_exponentials(self, N):
        table = roots_of_unity(N)
        k = np.arange(N)
        exact = np.exp(-2j * np.pi * k / N)
        assert np.max(np.abs(table - exact)) < 1e-12

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            roots_of_unity(0)


class TestEstimator:
    def _setup(self, N=101, d=2, seed=11):
        config = LatticeConfig(N, d)
        z = draw_generating_vector(config, rng_stream(seed, 0, PURPOSE_GENVEC))
        delta = draw_shift(config, rng_stream(seed, 0, PURPOSE_SHIFT))
        return config, z, delta

    def test_constant_at_zero_mode(self):
        config, z, delta = self._setup()
        out = estimate_coefficients(
            lambda pts: np.ones(pts.shape[0]), config, z, delta, [FrequencyIndex([0, 0])]
        )
        assert abs(out[FrequencyIndex([0, 0])] - 1.0) < 1e-14

    def test_exponential_mode_recovered(self):
        """f = e^{2 pi i h.x} estimated at the same h gives exactly 1."""
        config, z, delta = self._setup()
        h = FrequencyIndex([3, -2])
        hv = np.array([3.0, -2.0])
        out = estimate_coefficients(
            lambda pts: np.exp(2j * np.pi * (pts @ hv)), config, z, delta, [h]
        )
        assert abs(out[h] - 1.0) < 1e-12

    def test_full_cancellation(self):
        """Constant input at a non-dual frequency sums a full set of N-th roots."""
        config, z, delta = self._setup()
        h = FrequencyIndex([1, 0])
        assert not dual_membership(h, config, z)
        out = estimate_coefficients(
            lambda pts: np.ones(pts.shape[0]), config, z, delta, [h]
        )
        assert abs(out[h]) < 1e-10

    def test_conjugate_symmetry(self):
        config, z, delta = self._setup(N=241)
        f = lambda pts: np.cos(2 * np.pi * pts[:, 0]) + pts[:, 1] * (1 - pts[:, 1])
        targets = [FrequencyIndex([2, 1]), FrequencyIndex([-2, -1])]
        out = estimate_coefficients(f, config, z, delta, targets)
        assert abs(out[targets[1]] - out[targets[0]].conjugate()) < 1e-12

    def test_single_batched_evaluation(self):
        """f sees exactly one batch of exactly N nodes however many targets."""
        calls = []

        def f(pts):
            calls.append(pts.shape)
            return np.ones(pts.shape[0])

        config, z, delta = self._setup(N=61)
        targets = [FrequencyIndex([i, 0]) for i in range(-5, 6)]
        estimate_coefficients(f, config, z, delta, targets)
        assert calls == [(61, 2)]

    def test_rejects_empty_targets(self):
        config, z, delta = self._setup()
        with pytest.raises(ValueError):
            estimate_coefficients(lambda pts: np.ones(pts.shape[0]), config, z, delta, [])

    def test_nodes_shifted_correctly(self):
        """Estimator sees {k z / N + delta} mod 1: check via a recorded batch."""
        seen = {}

        def f(pts):
            seen["pts"] = pts.copy()
            return np.ones(pts.shape[0])

        config, z, delta = self._setup(N=13)
        estimate_coefficients(f, config, z, delta, [FrequencyIndex([0, 0])])
        k = np.arange(13)[:, None]
        expected = (k * np.asarray(z.z)[None, :] / 13.0 + np.asarray(delta.delta)) % 1.0
        assert np.max(np.abs(seen["pts"] - expected)) < 1e-14


class TestAliasing:
    """The estimator sees e^{2 pi i h'.x} at target h as exp(2 pi i (h'-h).delta)
    when h - h' is in the dual lattice, and as 0 otherwise."""

    def _dual_vector(self, rng, config, z):
        # solve z . ell = 0 (mod N) for the last component
        N, d = config.N, config.dim
        while True:
            ell = [int(rng.integers(-3, 4)) for _ in range(d - 1)]
            rest = sum(int(zj) * lj for zj, lj in zip(z.z[:-1], ell))
            inv = pow(int(z.z[-1]), -1, N)
            last = (-rest * inv) % N
            if last > N // 2:
                last -= N
            if last == 0 and not any(ell):
                last = N   # N e_d is always in the dual lattice
            candidate = ell + [last]
            if any(candidate):
                return FrequencyIndex(candidate)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_identity_over_random_draws(self, d):
        rng = np.random.default_rng(314 + d)
        for trial in range(15):
            N = int(rng.choice([53, 101, 149]))
            config = LatticeConfig(N, d)
            z = draw_generating_vector(config, rng_stream(trial, 0, PURPOSE_GENVEC))
            delta = draw_shift(config, rng_stream(trial, 0, PURPOSE_SHIFT))
            h = FrequencyIndex([int(rng.integers(-4, 5)) for _ in range(d)])

            ell = self._dual_vector(rng, config, z)
            h_src = FrequencyIndex([a + b for a, b in zip(h, ell)])
            assert dual_membership(FrequencyIndex([a - b for a, b in zip(h_src, h)]), config, z)
            hv = np.asarray(list(h_src), dtype=float)
            out = estimate_coefficients(
                lambda pts: np.exp(2j * np.pi * (pts @ hv)), config, z, delta, [h]
            )
            diff = np.asarray(list(h_src), dtype=float) - np.asarray(list(h), dtype=float)
            expected = np.exp(2j * np.pi * float(diff @ np.asarray(delta.delta)))
            assert abs(out[h] - expected) < 1e-10

            # a non-dual offset must vanish
            h_far = FrequencyIndex([c + 1 for c in h_src])
            if not dual_membership(
                FrequencyIndex([a - b for a, b in zip(h_far, h)]), config, z
            ):
                hv2 = np.asarray(list(h_far), dtype=float)
                out2 = estimate_coefficients(
                    lambda pts: np.exp(2j * np.pi * (pts @ hv2)), config, z, delta, [h]
                )
                assert abs(out2[h]) < 1e-10


class TestDualMembership:
    def test_zero_always_member(self):
        config = LatticeConfig(5, 2)
        z = GeneratingVector([1, 2])
        assert dual_membership(FrequencyIndex([0, 0]), config, z)

    def test_coarse_lattice_members(self):
        config = LatticeConfig(7, 3)
        z = GeneratingVector([1, 2, 3])
        assert dual_membership(FrequencyIndex([7, -14, 21]), config, z)

    def test_hand_computed_case(self):
        config = LatticeConfig(5, 2)
        z = GeneratingVector([1, 2])
        assert dual_membership(FrequencyIndex([1, 2]), config, z)
        assert not dual_membership(FrequencyIndex([1, 1]), config, z)

    def test_huge_components_no_overflow(self):
        N = 2147483647
        config = LatticeConfig(N, 2)
        z = GeneratingVector([N - 1, N - 2])
        assert dual_membership(FrequencyIndex([N, 2 * N]), config, z)
        assert dual_membership(FrequencyIndex([1, (N - 1) * pow(N - 2, -1, N) * -1 % N]), config, z)

    def test_collision_rate(self):
        """Random z hits a fixed nonzero ell with frequency about 1/(N-1)."""
        N = 101
        config = LatticeConfig(N, 2)
        ell = FrequencyIndex([3, -5])
        rng = rng_stream(909, 0, PURPOSE_GENVEC)
        hits = sum(
            dual_membership(ell, config, draw_generating_vector(config, rng))
            for _ in range(10_000)
        )
        p = 1.0 / (N - 1)
        assert hits / 10_000 <= p + 3.0 * math.sqrt(p * (1 - p) / 10_000)


class TestConfigValidation:
    def test_composite_N_rejected(self):
        with pytest.raises(ValueError):
            LatticeConfig(100, 2)

    def test_generating_vector_range(self):
        with pytest.raises(ValueError):
            GeneratingVector([0, 1])

    def test_shift_range(self):
        with pytest.raises(ValueError):
            RandomShift([0.5, 1.0])
        with pytest.raises(ValueError):
            RandomShift([-0.1])
