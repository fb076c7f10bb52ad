"""
Convergence of the exact L2 error across budgets
================================================

The benchmark proper: run both built-in test functions over the default
budget grid in d = 2, compute the exact squared L2 error from the known
coefficients, fit log-log rates, and write the CSV/SVG artifacts.
"""

import math
import pathlib

from medlattice import ExperimentConfig, fit_rate, run_experiment
from medlattice.experiment import emit_csv, figure3_table, write_svg_scatter

out = pathlib.Path("out")
out.mkdir(exist_ok=True)

for fn, alpha, seed in (("f1", 1.5, 20240801), ("f2", 2.5, 20240802)):
    cfg = ExperimentConfig(
        function=fn,
        dim=2,
        budgets=tuple(2**e for e in range(10, 19)),
        seed=seed,
        out=str(out / f"convergence_{fn}.csv"),
    )
    records = run_experiment(cfg)

    print(f"\n{fn} (alpha = {alpha}):")
    print("  M_max      N    R   |A|    squared L2 error")
    for r in records:
        err = "-" if r.squared_L2_error is None else f"{r.squared_L2_error:.3e}"
        print(f"  {r.M_max:7d} {r.N:6d} {r.R:4d} {r.index_set_size:5d}    {err}")

    usable = [r for r in records if r.feasible and r.squared_L2_error > 0]
    errs = [math.sqrt(r.squared_L2_error) for r in usable]
    vs_N = fit_rate(list(zip((r.N_star for r in usable), errs)))
    vs_M = fit_rate(list(zip((r.M for r in usable), errs)))
    print(f"  rate vs N_star: {vs_N.slope:+.3f} (R^2 {vs_N.r_squared:.3f}); "
          f"the error-balance target is -alpha = {-alpha}")
    print(f"  rate vs M:      {vs_M.slope:+.3f} (R^2 {vs_M.r_squared:.3f}); "
          f"-3 alpha / 4 = {-0.75 * alpha}")

    write_svg_scatter(
        str(out / f"convergence_{fn}.svg"),
        [(r.M, math.sqrt(r.squared_L2_error)) for r in usable],
        xlabel="M",
        ylabel="L2 error",
        ref_slopes=(-alpha / 2, -3 * alpha / 4, -alpha),
    )

# The smoother function converges faster against N_star but pays for it
# with a larger index set per budget; against M both land near M^(-3a/4).

# Parameter-selection-only table over a longer grid (no function runs), the
# growth of the truncation radius with the budget:
cfg = ExperimentConfig(function="f1", dim=2)
rows = figure3_table(cfg)
write_svg_scatter(
    str(out / "nstar_vs_budget.svg"),
    [(r.M, r.N_star) for r in rows if r.N_star > 0],
    xlabel="M",
    ylabel="N_star",
)
print(f"\nwrote {out}/convergence_f1.csv, convergence_f2.csv, three SVG plots")
print(f"N_star grows from {rows[0].N_star:.3f} at M_max=2^10 "
      f"to {rows[-1].N_star:.1f} at M_max=2^26")
