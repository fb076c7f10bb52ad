"""
How the parameters are chosen
=============================

Behind select_params sits a chain of closed decisions: the largest prime N
whose worst-case verification cost fits the budget, a tuning parameter tau
from a monotone root-finding problem, and the truncation radius
N_star = (N-1)/(exp(1/tau) P_N(tau)) that balances truncation against
estimation error.  This script walks the chain and prints the diagnostics
the experiment harness embeds in its CSV headers.
"""

import math

from medlattice import (
    BudgetSpec,
    PolynomialDecayWeights,
    ProductWeights,
    SmoothnessParams,
    check_conditions,
    corollary2_constant,
    select_params,
    tau_roots,
    theorem1_bound,
    tractability_diagnostics,
)

problem = SmoothnessParams(alpha=1.5, dim=2)
weights = ProductWeights([1.0, 1.0])

# The budget grid of the convergence experiments.  N_star < 1 means the
# index set would be empty: the algorithm cannot run at that budget.
print("  M_max      N    R    tau*     N_star")
for e in range(10, 19):
    sel = select_params(BudgetSpec(2**e, 0.01), problem, weights)
    flag = "" if sel.feasible else "   <- cannot run"
    print(f"  2^{e:<4} {sel.N_max:6d} {sel.R:4d}   {sel.tau_star:.4f}  {sel.N_star:9.3f}{flag}")

# tau is picked from two bracketing roots.  tau0 minimizes
# exp(4e/tau) P_N(tau); tau0_prime maximizes N_star.  If the minimum stays
# under exp(-4e) (N-1), a window [tau1, tau2] of admissible tau exists and
# tau* = max(tau0_prime, tau1); otherwise tau* falls back to tau0_prime.
roots = tau_roots(10007, problem, weights)
print(f"\nat N = 10007: tau0 = {roots.tau0:.4f}, tau0' = {roots.tau0_prime:.4f}, "
      f"window exists: {roots.feasible}")

# With unit weights the window requires astronomically large N.  Shrinking
# the weights makes it reachable:
small = ProductWeights([1e-6])
roots = tau_roots(1000003, SmoothnessParams(1.5, 1), small)
print(f"at N = 1000003, gamma = 1e-6: window [{roots.tau1:.3f}, {roots.tau2:.3f}] "
      f"around tau0 = {roots.tau0:.3f}")

# The condition report says which hypotheses of the error analysis the
# selected parameters actually satisfy; the harness stores it per budget.
sel = select_params(BudgetSpec(2**16, 0.01), problem, weights)
report = check_conditions(sel, problem, weights, R=sel.R, delta=0.01)
print(f"\nconditions at M_max = 2^16 (N = {sel.N_max}):")
for c in report:
    print(f"  {c.name:32s} {str(c.holds):5s}  lhs = {c.lhs:.4g}  rhs = {c.rhs:.4g}")

# The a-priori error bound that goes with these parameters, for a function
# of unit norm, and the budget-form constant:
print(f"\ntheorem bound (unit norm):  {theorem1_bound(sel, problem, 1.0):.4f}")
print(f"budget-form constant:       {corollary2_constant(sel.N_max, sel.tau_star, 0.01, 1.5):.4g}")

# Dimension dependence: with summable root weights the constants are
# dimension-free; gamma_j = j^(-3) qualifies, gamma_j = j^(-2) grows like
# log d, and flat weights give neither.
for beta in (3.0, 2.0, 0.0):
    diag = tractability_diagnostics(PolynomialDecayWeights(beta), SmoothnessParams(1.0, 8), 0.5)
    G = "inf" if math.isinf(diag.G_inf) else f"{diag.G_inf:.3f}"
    print(f"beta = {beta}: case = {diag.case:7s} G_inf = {G:6s} "
          f"inequality holds at N in {diag.checked_N}: {diag.inequality_ok}")
