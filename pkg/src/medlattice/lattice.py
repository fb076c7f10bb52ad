"""Rank-1 lattice nodes, seeded randomness, and the shifted Fourier estimator.

A rank-1 lattice rule with prime size N and generating vector z samples f at
the shifted nodes x_k = {k*z/N + Delta}, k = 0..N-1.  The estimator for the
Fourier coefficient at frequency h is the plain average

    (1/N) * sum_k f(x_k) * exp(-2*pi*i * h.x_k),

which by the rank-1 structure needs one modular dot product m = h.z mod N
per frequency plus a lookup into the table of N-th roots of unity.  All
randomness flows through counter-based Philox streams keyed by
(master_seed, repetition, purpose) so repetitions are independent of
execution order and bit-reproducible under any thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Sequence

import numpy as np

from .korobov import FrequencyIndex
from .params import is_prime

__all__ = [
    "LatticeConfig",
    "GeneratingVector",
    "RandomShift",
    "PURPOSE_GENVEC",
    "PURPOSE_SHIFT",
    "rng_stream",
    "draw_generating_vector",
    "draw_shift",
    "roots_of_unity",
    "estimate_coefficients",
    "dual_membership",
]

# purpose tags separating the random streams of one repetition
PURPOSE_GENVEC = 0
PURPOSE_SHIFT = 1

_RENORM_EVERY = 1024


@dataclass(frozen=True)
class LatticeConfig:
    """Lattice size N (prime, verified) and dimension."""

    N: int
    dim: int

    def __post_init__(self):
        if not is_prime(self.N):
            raise ValueError(f"N = {self.N} is not prime")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


@dataclass(frozen=True)
class GeneratingVector:
    """Integer generating vector z with components in {1, ..., N-1}."""

    z: tuple

    def __init__(self, z: Sequence[int]):
        z = tuple(int(c) for c in z)
        if any(c < 1 for c in z):
            raise ValueError("generating vector components must be >= 1")
        object.__setattr__(self, "z", z)

    def __len__(self) -> int:
        return len(self.z)


@dataclass(frozen=True)
class RandomShift:
    """Real shift vector Delta with components in [0, 1)."""

    delta: tuple

    def __init__(self, delta: Sequence[float]):
        delta = tuple(float(c) for c in delta)
        if any(not (0.0 <= c < 1.0) for c in delta):
            raise ValueError("shift components must lie in [0, 1)")
        object.__setattr__(self, "delta", delta)

    def __len__(self) -> int:
        return len(self.delta)


def rng_stream(master_seed: int, repetition: int, purpose: int) -> np.random.Generator:
    """Counter-based stream keyed by (master_seed, repetition, purpose).

    Distinct key triples give statistically independent Philox streams, so
    repetition r can be generated on any worker in any order with identical
    results.
    """
    if master_seed < 0 or repetition < 0 or purpose < 0:
        raise ValueError("stream key components must be non-negative")
    seq = np.random.SeedSequence([int(master_seed), int(repetition), int(purpose)])
    return np.random.Generator(np.random.Philox(seq))


def draw_generating_vector(config: LatticeConfig, rng: np.random.Generator) -> GeneratingVector:
    """Uniform z in {1,...,N-1}^d without modulo bias.

    numpy's ``Generator.integers`` uses Lemire-style rejection, so each
    component is exactly uniform; N = 2 always yields the all-ones vector.
    """
    comps = rng.integers(1, config.N, size=config.dim)
    return GeneratingVector(comps.tolist())


def draw_shift(config: LatticeConfig, rng: np.random.Generator) -> RandomShift:
    """Uniform shift in [0,1)^d with 53-bit resolution per component."""
    return RandomShift(rng.random(config.dim).tolist())


def roots_of_unity(N: int) -> np.ndarray:
    """Table w[k] = exp(-2*pi*i*k/N), k = 0..N-1.

    Built by repeated multiplication with w[1], re-anchored to an exact
    cos/sin evaluation every 1024 entries so the accumulated rounding error
    stays below 1e-12 for any table length.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    table = np.empty(N, dtype=np.complex128)
    step = complex(math.cos(-2.0 * math.pi / N), math.sin(-2.0 * math.pi / N))
    cur = complex(1.0, 0.0)
    for k in range(N):
        if k % _RENORM_EVERY == 0:
            ang = -2.0 * math.pi * k / N
            cur = complex(math.cos(ang), math.sin(ang))
        table[k] = cur
        cur *= step
    return table


def _lattice_nodes(config: LatticeConfig, z: GeneratingVector, delta: RandomShift) -> np.ndarray:
    N, d = config.N, config.dim
    if (N - 1) * (N - 1) < 2**62:
        k = np.arange(N, dtype=np.int64)
        zz = np.asarray(z.z, dtype=np.int64)
        frac = (k[:, None] * zz[None, :]) % N
    else:
        # exact big-int fallback; N this large is outside any practical run
        frac = np.array(
            [[(kk * zj) % N for zj in z.z] for kk in range(N)], dtype=np.int64
        )
    nodes = frac.astype(float) / N + np.asarray(delta.delta, dtype=float)[None, :]
    nodes -= np.floor(nodes)
    return nodes


def estimate_coefficients(
    f_eval: Callable[[np.ndarray], np.ndarray],
    config: LatticeConfig,
    z: GeneratingVector,
    delta: RandomShift,
    targets: Iterable[FrequencyIndex],
) -> Dict[FrequencyIndex, complex]:
    """Estimate the Fourier coefficients of f at every target frequency.

    f is evaluated exactly once on the full batch of N shifted lattice nodes;
    each target h then costs one modular dot product plus N complex
    multiply-adds against the shared roots-of-unity table.

    Parameters
    ----------
    f_eval : callable
        Maps an (N, d) array of points in [0,1)^d to N (real or complex)
        values.
    targets : iterable of FrequencyIndex
        Nonempty collection of frequencies.

    Returns
    -------
    dict
        FrequencyIndex -> complex estimate.
    """
    targets = list(targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    N, d = config.N, config.dim
    if len(z) != d or len(delta) != d:
        raise ValueError("z and delta must match the lattice dimension")
    if any(not (1 <= c <= N - 1) for c in z.z):
        raise ValueError("generating vector components must lie in {1,...,N-1}")

    nodes = _lattice_nodes(config, z, delta)
    vals = np.asarray(f_eval(nodes))
    if vals.shape != (N,):
        raise ValueError(f"f_eval returned shape {vals.shape}, expected ({N},)")
    vals = vals.astype(np.complex128, copy=False)

    table = roots_of_unity(N)
    k = np.arange(N, dtype=np.int64)
    delta_vec = np.asarray(delta.delta, dtype=float)

    out: Dict[FrequencyIndex, complex] = {}
    for h in targets:
        # Python-int dot product: components up to ~N/2 times z up to N-1
        # would overflow 64-bit machine words for large N
        m = sum(int(hj) * int(zj) for hj, zj in zip(h, z.z)) % N
        idx = (m * k) % N
        phase = np.exp(-2j * math.pi * float(np.dot(list(h), delta_vec)))
        out[h] = complex(phase * (vals @ table[idx]) / N)
    return out


def dual_membership(ell, config: LatticeConfig, z: GeneratingVector) -> bool:
    """Whether z.ell = 0 (mod N), i.e. ell lies in the dual of the lattice.

    Uses Python integers throughout, so arbitrarily large components are
    handled exactly.
    """
    comps = ell.components if isinstance(ell, FrequencyIndex) else tuple(int(c) for c in ell)
    if len(comps) != config.dim:
        raise ValueError("ell must match the lattice dimension")
    return sum(int(lj) * int(zj) for lj, zj in zip(comps, z.z)) % config.N == 0
