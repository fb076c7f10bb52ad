"""Hyperbolic-cross index sets and their cardinality bounds.

The index set A_d(L) collects all integer frequency vectors h with

    prod_{j: h_j != 0} |h_j| * gamma_j^(-1/(2*alpha)) <= L,

equivalently r_{2*alpha,gamma}(h) <= L^(2*alpha).  This module enumerates the
set by depth-first recursion, provides three analytic upper bounds on its
cardinality plus the prime-lattice cap, and serializes index sets to CSV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from math import exp, log
from typing import Iterator, Sequence

import numpy as np

from .korobov import FrequencyIndex, ProductWeights, SmoothnessParams
from .params import log_PN

__all__ = [
    "HyperbolicCross",
    "PartialZetaSum",
    "enumerate_hyperbolic_cross",
    "bound_basic",
    "bound_min_q",
    "bound_refined",
    "corollary_cap",
    "write_indices_csv",
    "read_indices_csv",
]

# Relative slack on the log-scale membership predicate.  Boundary cases like
# |h_j| = L with gamma_j = 1 must not flip on the last bit of log(L).
_LOG_SLACK = 1e-9

_DEFAULT_CAP = 10**8


def _log_costs(params: SmoothnessParams, weights: ProductWeights):
    # cost of using |h_j| = m in coordinate j is log(m) + c_j with
    # c_j = -(1/(2*alpha)) * log(gamma_j) >= 0
    inv2a = 1.0 / (2.0 * params.alpha)
    return [-inv2a * log(g) for g in weights.require(params.dim)]


def _admits(components, log_budget: float, costs) -> bool:
    spent = math.fsum(log(abs(c)) + costs[j] for j, c in enumerate(components) if c != 0)
    return spent <= log_budget + _LOG_SLACK


@dataclass(frozen=True)
class HyperbolicCross:
    """An enumerated index set A_d(L), immutable and thread-shareable.

    Attributes:
        L: the truncation radius; the set is empty when L < 1.
        params: smoothness/dimension parameters.
        weights: the product weights.
        indices: tuple of FrequencyIndex in lexicographic component order.
    """

    L: float
    params: SmoothnessParams
    weights: ProductWeights
    indices: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "_members", frozenset(h.components for h in self.indices)
        )

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[FrequencyIndex]:
        return iter(self.indices)

    def __contains__(self, h) -> bool:
        comps = tuple(h.components) if isinstance(h, FrequencyIndex) else tuple(int(c) for c in h)
        return comps in self._members

    def __repr__(self):
        return (
            f"HyperbolicCross(L={self.L:.6g}, d={self.params.dim}, "
            f"size={len(self.indices)})"
        )


def enumerate_hyperbolic_cross(
    L: float,
    params: SmoothnessParams,
    weights: ProductWeights,
    cap: int = _DEFAULT_CAP,
) -> HyperbolicCross:
    """Enumerate A_d(L) by depth-first recursion over coordinates.

    The recursion tracks the remaining budget in log space
    (log L minus the accumulated log|h_j| - (1/(2*alpha))*log(gamma_j)),
    so products of many small weights cannot underflow.  Per coordinate the
    admissible range is |h_j| <= exp(remaining budget + (1/(2*alpha))*log
    gamma_j); candidates are emitted in ascending component order, which
    makes the overall output lexicographic.

    Args:
        L: truncation radius; L < 1 returns the empty set.
        params: SmoothnessParams (alpha, dim).
        weights: at least ``params.dim`` product weights.
        cap: memory guard; enumeration is refused when the analytic bound
            projects more than this many indices.

    Returns:
        HyperbolicCross with lexicographically sorted indices.

    Raises:
        ValueError: when the projected cardinality exceeds ``cap``.
    """
    d = params.dim
    weights.require(d)
    if L < 1.0:
        return HyperbolicCross(L=float(L), params=params, weights=weights, indices=())

    projected = bound_basic(L, 1.0, params, weights)
    if projected > cap:
        raise ValueError(
            f"projected cardinality {projected:.3g} exceeds the cap {cap}; "
            "raise `cap` explicitly if this is intended"
        )

    costs = _log_costs(params, weights)
    log_budget = log(L)
    out = []
    comps = [0] * d

    def recurse(j: int, remaining: float):
        if j == d:
            if _admits(comps, log_budget, costs):
                out.append(FrequencyIndex(comps))
            return
        # largest admissible |h_j| given the budget left for this suffix
        m = int(exp(remaining - costs[j]) + 1e-12) if remaining >= costs[j] else 0
        for c in range(-m, m + 1):
            comps[j] = c
            recurse(j + 1, remaining if c == 0 else remaining - (log(abs(c)) + costs[j]))
        comps[j] = 0

    recurse(0, log_budget + _LOG_SLACK)
    if len(out) > cap:
        raise ValueError(f"enumerated {len(out)} indices, exceeding the cap {cap}")
    return HyperbolicCross(L=float(L), params=params, weights=weights, indices=tuple(out))


# --------------------------------------------------------------------------
# cardinality bounds
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PartialZetaSum:
    """The partial sum H_L(q) = sum_{n=1}^{floor(L)} n^(-q) with L and q."""

    L: float
    q: float
    value: float

    @classmethod
    def of(cls, L: float, q: float) -> "PartialZetaSum":
        if q < 1.0:
            raise ValueError("q must be >= 1")
        n = int(L)
        if n < 1:
            raise ValueError("L must be >= 1")
        return cls(L=float(L), q=float(q), value=math.fsum(k ** (-q) for k in range(1, n + 1)))


def _H(L: float, q: float) -> float:
    return PartialZetaSum.of(L, q).value


def _H_prime(L: float, q: float) -> float:
    # d/dq H_L(q) = -sum log(n) * n^(-q)
    n = int(L)
    return -math.fsum(log(k) * k ** (-q) for k in range(2, n + 1))


def bound_basic(
    L: float, tau: float, params: SmoothnessParams, weights: ProductWeights
) -> float:
    """Cardinality bound 1 + L*exp(1/tau)/(1 + tau*log L) * P_L(tau, d, gamma).

    Valid for every tau > 0; P_L is the usual product with N replaced by L.

    Args:
        L: radius, must be >= 1.
        tau: any positive tuning value.
    """
    if L < 1.0:
        raise ValueError("bound_basic requires L >= 1")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    lp = log_PN(tau, params, weights, L)
    return 1.0 + exp(log(L) + 1.0 / tau - log(1.0 + tau * log(L)) + lp)


def bound_min_q(
    L: float,
    params: SmoothnessParams,
    weights: ProductWeights,
    q_grid: Sequence[float] = (1.1, 1.5, 2.0, 3.0),
) -> float:
    """Cardinality bound 1 + min_q L^q/zeta(q) * prod(1 + 2*gamma_j^(q/(2*alpha))*zeta(q)).

    Every q > 1 yields a valid upper bound, so minimizing over a finite grid
    is still a valid (if not optimal) bound.

    Args:
        q_grid: finite grid of exponents, all strictly greater than 1.
    """
    from .korobov import riemann_zeta

    if L < 1.0:
        raise ValueError("bound_min_q requires L >= 1")
    if not q_grid:
        raise ValueError("q_grid must be nonempty")
    gammas = weights.require(params.dim)
    inv2a = 1.0 / (2.0 * params.alpha)
    best = math.inf
    for q in q_grid:
        if q <= 1.0:
            raise ValueError("every grid point must satisfy q > 1")
        z = riemann_zeta(q)
        lv = q * log(L) - log(z) + math.fsum(
            math.log1p(2.0 * g ** (q * inv2a) * z) for g in gammas
        )
        best = min(best, lv)
    return 1.0 + exp(best)


def _refined_value(L: float, q: float, gammas, inv2a: float) -> float:
    H = _H(L, q)
    return 1.0 + exp(
        q * log(L) - log(H) + math.fsum(math.log1p(2.0 * g ** (q * inv2a) * H) for g in gammas)
    )


def bound_refined(L: float, params: SmoothnessParams, weights: ProductWeights) -> float:
    """Sharper bound with the zeta function replaced by the partial sum H_L(q).

    The minimizing exponent q* solves

        -(H'_L/H_L)(q) * (sum_j w_j(q) - 1)
            - (1/(2*alpha)) * sum_j w_j(q) * log(gamma_j)  =  log L,

    with w_j(q) = 2*gamma_j^(q/(2*alpha))*H_L(q) / (1 + 2*gamma_j^(q/(2*alpha))*H_L(q)).
    The left side is strictly decreasing in q and the minimizer lies in
    [1, q_bar], where q_bar solves sum_j w_j(q_bar) = 1.  If the left side at
    q=1 is already <= log L the minimizer is q*=1; if no sign change occurs
    in [1, q_bar] both endpoints are evaluated and the smaller bound wins.

    Args:
        L: radius, must be >= 2 so that H_L is a nontrivial sum.

    Raises:
        ArithmeticError: bisection failed to locate the crossing within
            200 iterations at tolerance 1e-10.
    """
    if L < 2.0:
        raise ValueError("bound_refined requires L >= 2")
    gammas = weights.require(params.dim)
    inv2a = 1.0 / (2.0 * params.alpha)
    logL = log(L)

    def weights_w(q: float):
        H = _H(L, q)
        return [2.0 * g ** (q * inv2a) * H / (1.0 + 2.0 * g ** (q * inv2a) * H) for g in gammas]

    def lhs(q: float) -> float:
        H = _H(L, q)
        Hp = _H_prime(L, q)
        w = weights_w(q)
        return -(Hp / H) * (math.fsum(w) - 1.0) - inv2a * math.fsum(
            wj * log(g) for wj, g in zip(w, gammas)
        )

    if lhs(1.0) <= logL:
        return _refined_value(L, 1.0, gammas, inv2a)

    # upper end of the search interval: q_bar with sum_j w_j(q_bar) = 1 when
    # that crossing exists; otherwise (e.g. several coordinates at gamma = 1,
    # where the w_j sum stays above 1 for every q) expand until the left side
    # itself has dropped below log L, which always happens since lhs -> 0
    def sum_w(q: float) -> float:
        return math.fsum(weights_w(q))

    q_hi = 2.0
    if sum_w(1.0) > 1.0:
        while sum_w(q_hi) >= 1.0 and lhs(q_hi) > logL:
            q_hi *= 2.0
            if q_hi > 2.0**40:
                raise ArithmeticError("bracket expansion for the minimizing q failed")
    if lhs(q_hi) >= logL:
        # no crossing located inside [1, q_hi]; both endpoints give valid bounds
        return min(
            _refined_value(L, 1.0, gammas, inv2a),
            _refined_value(L, q_hi, gammas, inv2a),
        )
    lo, hi = 1.0, q_hi
    converged = False
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lhs(mid) > logL:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * max(1.0, mid):
            converged = True
            break
    if not converged:
        raise ArithmeticError("bisection for the minimizing q did not converge")
    return _refined_value(L, 0.5 * (lo + hi), gammas, inv2a)


def corollary_cap(N: int, tau: float, N_star: float) -> float:
    """The prime-lattice cardinality cap 1 + (N-1)/(1 + tau*log(N_star)).

    Valid for |A_d(N_star)| whenever N is prime and N_star >= 1.

    Raises:
        ValueError: N not prime, tau <= 0, or N_star < 1.
    """
    from .params import is_prime

    if not is_prime(N):
        raise ValueError("N must be prime")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if N_star < 1.0:
        raise ValueError("cap requires N_star >= 1")
    return 1.0 + (N - 1) / (1.0 + tau * log(N_star))


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def write_indices_csv(cross: HyperbolicCross, path) -> None:
    """Write one row per index, columns h_1..h_d, lexicographic order."""
    d = cross.params.dim
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"h_{j + 1}" for j in range(d)])
        for h in cross.indices:
            writer.writerow(list(h.components))


def read_indices_csv(path) -> list:
    """Read back a list of FrequencyIndex from write_indices_csv output."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not all(name.startswith("h_") for name in header):
            raise ValueError("not an index-set CSV")
        for row in reader:
            out.append(FrequencyIndex([int(v) for v in row]))
    return out
