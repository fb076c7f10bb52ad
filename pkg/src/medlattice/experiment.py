"""Convergence experiments: exact L2 errors across budgets, rate fits, CSV/SVG.

For each evaluation budget M_max the harness selects (N, R, tau), runs the
median algorithm on a built-in test function, and computes the squared L2
error exactly from the known Fourier coefficients:

    ||f||^2 - sum_{h in A} |f_hat(h)|^2 + sum_{h in A} |c_h - f_hat(h)|^2.

Results go to a CSV with a #key=value comment header; an optional
self-contained SVG shows the log-log scatter with reference slope lines.
Also provides the parameter-selection-only table of N_star versus M over an
extended budget range.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from math import fsum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .korobov import (
    ProductWeights,
    SmoothnessParams,
    SpectralOracle,
    cosine_pair_oracle,
    test_function_f1,
    test_function_f2,
)
from .median_approx import AlgorithmParams, MedianApproximation, run
from .params import (
    BudgetSpec,
    PolynomialDecayWeights,
    SelectedParams,
    check_conditions,
    select_params,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "RateFit",
    "exact_squared_error",
    "run_experiment",
    "emit_csv",
    "parse_csv",
    "fit_rate",
    "figure3_table",
    "emit_figure3_csv",
    "write_svg_scatter",
    "main",
]

DEFAULT_BUDGET_EXPONENTS = tuple(range(10, 19))
FIG3_EXPONENTS = tuple(range(10, 27))
DEFAULT_ALPHA = {"f1": 1.5, "f2": 2.5, "exp": 1.5}
DEFAULT_DELTA = 0.01


def _fmt(v: float) -> str:
    return "%.17g" % v


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs; mirrors the CLI flags."""

    function: str = "f1"              # f1 | f2 | exp
    alpha: Optional[float] = None     # None -> per-function default
    gammas: Optional[object] = None   # list of floats, "poly:beta", or None (all ones)
    dim: int = 2
    delta: float = DEFAULT_DELTA
    budgets: Tuple[int, ...] = tuple(2**e for e in DEFAULT_BUDGET_EXPONENTS)
    seed: int = 20240801
    runs_per_budget: int = 1
    out: Optional[str] = None
    workers: int = 1
    h0: Optional[Tuple[int, ...]] = None   # exp mode only; default all-ones

    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        if self.function not in DEFAULT_ALPHA:
            raise ValueError(f"unknown function {self.function!r}")
        return DEFAULT_ALPHA[self.function]

    def resolved_weights(self) -> ProductWeights:
        return _parse_gammas(self.gammas, self.dim)

    def problem(self) -> SmoothnessParams:
        return SmoothnessParams(alpha=self.resolved_alpha(), dim=self.dim)

    def oracle(self) -> SpectralOracle:
        if self.function == "f1":
            return test_function_f1(self.dim)
        if self.function == "f2":
            return test_function_f2(self.dim)
        if self.function == "exp":
            h0 = self.h0 if self.h0 is not None else (1,) * self.dim
            return cosine_pair_oracle(h0)
        raise ValueError(f"unknown function {self.function!r}")


def _parse_gammas(spec, dim: int) -> ProductWeights:
    if spec is None:
        return ProductWeights([1.0] * dim)
    if isinstance(spec, str):
        if spec.startswith("poly:"):
            return PolynomialDecayWeights(float(spec[5:])).take(dim)
        values = [float(v) for v in spec.split(",")]
    else:
        values = [float(v) for v in spec]
    if len(values) < dim:
        raise ValueError(f"need {dim} weights, got {len(values)}")
    return ProductWeights(values[:dim])


@dataclass(frozen=True)
class ExperimentRecord:
    """One (budget, run) outcome; wall_time is informational only."""

    M_max: int
    run_index: int
    N: int
    R: int
    M: int
    tau_star: float
    N_star: float
    index_set_size: int
    feasible: bool
    squared_L2_error: Optional[float]
    wall_time: Optional[float] = field(default=None, compare=False)


def exact_squared_error(f: SpectralOracle, approx: MedianApproximation) -> float:
    """Exact squared L2 error of the approximation via Parseval.

    Requires the oracle's exact norm and coefficients.  A tiny negative
    result (within 1e-12 of zero relative to the norm) is floored at 0;
    anything more negative means the oracle's norm and coefficients are
    inconsistent and raises.
    """
    indices = approx.index_set.indices
    truth_sq = fsum(abs(f.coefficient(h)) ** 2 for h in indices)
    resid = fsum(
        abs(approx.coefficients[h] - f.coefficient(h)) ** 2 for h in indices
    )
    err = f.l2_norm_sq - truth_sq + resid
    tol = 1e-12 * max(1.0, f.l2_norm_sq)
    if err < -tol:
        raise ValueError(
            f"squared error {err!r} is negative beyond rounding: "
            "oracle norm and coefficients disagree"
        )
    return max(err, 0.0)


def _run_master_seed(seed: int, budget_index: int, run_index: int) -> int:
    state = np.random.SeedSequence([seed, budget_index, run_index]).generate_state(
        1, dtype=np.uint64
    )
    return int(state[0])


def _selections_for(config: ExperimentConfig) -> Dict[int, SelectedParams]:
    problem = config.problem()
    weights = config.resolved_weights()
    return {
        M: select_params(BudgetSpec(M, config.delta), problem, weights)
        for M in config.budgets
    }


def run_experiment(config: ExperimentConfig) -> List[ExperimentRecord]:
    """Run the full budget grid and write the CSV if an output path is set.

    Infeasible budgets (N_star < 1) still produce records, flagged
    feasible=False with an empty error field, so the emitted grid always
    matches the requested one.
    """
    problem = config.problem()
    weights = config.resolved_weights()
    oracle = config.oracle()
    records: List[ExperimentRecord] = []
    selections: Dict[int, SelectedParams] = {}

    for bi, M_max in enumerate(config.budgets):
        sp = select_params(BudgetSpec(M_max, config.delta), problem, weights)
        selections[M_max] = sp
        for ri in range(config.runs_per_budget):
            if not sp.feasible:
                size = 0
                records.append(
                    ExperimentRecord(
                        M_max=M_max,
                        run_index=ri,
                        N=sp.N_max,
                        R=sp.R,
                        M=sp.N_max * sp.R,
                        tau_star=sp.tau_star,
                        N_star=sp.N_star,
                        index_set_size=size,
                        feasible=False,
                        squared_L2_error=None,
                        wall_time=None,
                    )
                )
                continue
            t0 = time.perf_counter()
            ap = AlgorithmParams.from_problem(
                N=sp.N_max,
                R=sp.R,
                tau=sp.tau_star,
                master_seed=_run_master_seed(config.seed, bi, ri),
                problem=problem,
                weights=weights,
            )
            approx = run(oracle.evaluate, ap, problem, weights, workers=config.workers)
            err = exact_squared_error(oracle, approx)
            records.append(
                ExperimentRecord(
                    M_max=M_max,
                    run_index=ri,
                    N=sp.N_max,
                    R=sp.R,
                    M=sp.N_max * sp.R,
                    tau_star=sp.tau_star,
                    N_star=sp.N_star,
                    index_set_size=len(approx.index_set),
                    feasible=True,
                    squared_L2_error=err,
                    wall_time=time.perf_counter() - t0,
                )
            )

    if config.out:
        text = emit_csv(config, records, selections)
        with open(config.out, "w", newline="") as fh:
            fh.write(text)
    return records


_CSV_COLUMNS = (
    "M_max,run_index,N,R,M,tau_star,N_star,index_set_size,feasible,squared_L2_error"
)


def emit_csv(
    config: ExperimentConfig,
    records: Sequence[ExperimentRecord],
    selections: Optional[Dict[int, SelectedParams]] = None,
) -> str:
    """Serialize records with a provenance comment header, LF line endings.

    Header content depends only on the experiment definition (never on
    worker count or timing), so identical seeds give byte-identical files.
    """
    weights = config.resolved_weights()
    lines = [
        f"#function={config.function}",
        "#alpha=" + _fmt(config.resolved_alpha()),
        "#gamma=" + ",".join(_fmt(g) for g in weights.gammas),
        f"#dim={config.dim}",
        "#delta=" + _fmt(config.delta),
        f"#seed={config.seed}",
        f"#runs_per_budget={config.runs_per_budget}",
        "#budgets=" + ",".join(str(m) for m in config.budgets),
    ]
    if selections:
        problem = config.problem()
        for M_max in config.budgets:
            sp = selections.get(M_max)
            if sp is None:
                continue
            kv = ";".join(
                f"{k}={v if not isinstance(v, float) else _fmt(v)}"
                for k, v in sp.header_items()
            )
            lines.append(f"#select.{M_max}={kv}")
            report = check_conditions(sp, problem, weights, R=sp.R, delta=config.delta)
            kv = ";".join(f"{k}={v}" for k, v in report.header_items())
            lines.append(f"#conditions.{M_max}={kv}")
    lines.append(_CSV_COLUMNS)
    for r in records:
        err = "" if r.squared_L2_error is None else _fmt(r.squared_L2_error)
        lines.append(
            ",".join(
                [
                    str(r.M_max),
                    str(r.run_index),
                    str(r.N),
                    str(r.R),
                    str(r.M),
                    _fmt(r.tau_star),
                    _fmt(r.N_star),
                    str(r.index_set_size),
                    "true" if r.feasible else "false",
                    err,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> List[ExperimentRecord]:
    """Inverse of emit_csv (comment header ignored, wall_time not stored)."""
    records = []
    for line in text.splitlines():
        if not line or line.startswith("#") or line.startswith("M_max,"):
            continue
        parts = line.split(",")
        if len(parts) != 10:
            raise ValueError(f"malformed row: {line!r}")
        records.append(
            ExperimentRecord(
                M_max=int(parts[0]),
                run_index=int(parts[1]),
                N=int(parts[2]),
                R=int(parts[3]),
                M=int(parts[4]),
                tau_star=float(parts[5]),
                N_star=float(parts[6]),
                index_set_size=int(parts[7]),
                feasible=parts[8] == "true",
                squared_L2_error=float(parts[9]) if parts[9] else None,
            )
        )
    return records


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def fit_rate(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Least-squares fit of log(err) against log(x).

    Needs at least three strictly positive points; returns the slope, the
    intercept, and the coefficient of determination of the log-log fit.
    """
    if len(points) < 3:
        raise ValueError("need at least 3 points for a rate fit")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("rate fits require positive values")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(slope=float(slope), intercept=float(intercept), r_squared=r2)


# --------------------------------------------------------------------------
# figure 3: N_star versus M, parameter selection only
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Figure3Row:
    M_max: int
    N: int
    R: int
    M: int
    tau_star: float
    N_star: float


def figure3_table(
    config: ExperimentConfig, exponents: Sequence[int] = FIG3_EXPONENTS
) -> List[Figure3Row]:
    """Parameter selection across an extended budget grid, no function runs."""
    problem = config.problem()
    weights = config.resolved_weights()
    rows = []
    for e in exponents:
        M_max = 2**e
        sp = select_params(BudgetSpec(M_max, config.delta), problem, weights)
        rows.append(
            Figure3Row(
                M_max=M_max,
                N=sp.N_max,
                R=sp.R,
                M=sp.N_max * sp.R,
                tau_star=sp.tau_star,
                N_star=sp.N_star,
            )
        )
    return rows


def emit_figure3_csv(config: ExperimentConfig, rows: Sequence[Figure3Row]) -> str:
    weights = config.resolved_weights()
    lines = [
        "#alpha=" + _fmt(config.resolved_alpha()),
        "#gamma=" + ",".join(_fmt(g) for g in weights.gammas),
        f"#dim={config.dim}",
        "#delta=" + _fmt(config.delta),
        "M_max,N,R,M,tau_star,N_star",
    ]
    for r in rows:
        lines.append(
            ",".join(
                [str(r.M_max), str(r.N), str(r.R), str(r.M), _fmt(r.tau_star), _fmt(r.N_star)]
            )
        )
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# SVG output
# --------------------------------------------------------------------------

_SVG_W, _SVG_H = 640, 480
_MARGIN = 60


def _svg_transform(values, lo, hi, pix_lo, pix_hi):
    logv = math.log10(values)
    frac = (logv - lo) / (hi - lo) if hi > lo else 0.5
    return pix_lo + frac * (pix_hi - pix_lo)


def write_svg_scatter(
    path: str,
    points: Sequence[Tuple[float, float]],
    xlabel: str,
    ylabel: str,
    ref_slopes: Sequence[float] = (),
) -> None:
    """Self-contained log-log scatter plot with optional reference slopes.

    Reference lines are anchored at the first data point and labeled with
    their exponent.  Output is deterministic: fixed canvas, fixed formats,
    no timestamps.
    """
    pts = [(x, y) for x, y in points if x > 0 and y > 0]
    if not pts:
        raise ValueError("no positive points to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    ref_lines = []
    x0, y0 = pts[0]
    x1 = max(xs)
    for s in ref_slopes:
        y_at_end = y0 * (x1 / x0) ** s
        ref_lines.append(((x0, y0), (x1, y_at_end), s))
        ys.append(y_at_end)
    lx_lo, lx_hi = math.log10(min(xs)), math.log10(max(xs))
    ly_lo, ly_hi = math.log10(min(ys)), math.log10(max(ys))
    pad = 0.05
    lx_lo, lx_hi = lx_lo - pad, lx_hi + pad
    ly_lo, ly_hi = ly_lo - pad, ly_hi + pad

    def X(v):
        return _svg_transform(v, lx_lo, lx_hi, _MARGIN, _SVG_W - _MARGIN)

    def Y(v):
        return _svg_transform(v, ly_lo, ly_hi, _SVG_H - _MARGIN, _MARGIN)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_SVG_H - _MARGIN}" x2="{_SVG_W - _MARGIN}" '
        f'y2="{_SVG_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_SVG_H - _MARGIN}" stroke="black"/>',
    ]
    # decade ticks
    for e in range(math.ceil(lx_lo), math.floor(lx_hi) + 1):
        px = X(10.0**e)
        out.append(
            f'<line x1="{px:.2f}" y1="{_SVG_H - _MARGIN}" x2="{px:.2f}" '
            f'y2="{_SVG_H - _MARGIN + 5}" stroke="black"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{_SVG_H - _MARGIN + 20}" font-size="11" '
            f'text-anchor="middle">1e{e}</text>'
        )
    for e in range(math.ceil(ly_lo), math.floor(ly_hi) + 1):
        py = Y(10.0**e)
        out.append(
            f'<line x1="{_MARGIN - 5}" y1="{py:.2f}" x2="{_MARGIN}" '
            f'y2="{py:.2f}" stroke="black"/>'
        )
        out.append(
            f'<text x="{_MARGIN - 8}" y="{py + 4:.2f}" font-size="11" '
            f'text-anchor="end">1e{e}</text>'
        )
    out.append(
        f'<text x="{_SVG_W // 2}" y="{_SVG_H - 15}" font-size="13" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="18" y="{_SVG_H // 2}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {_SVG_H // 2})">{ylabel}</text>'
    )
    for (xa, ya), (xb, yb), s in ref_lines:
        out.append(
            f'<line x1="{X(xa):.2f}" y1="{Y(ya):.2f}" x2="{X(xb):.2f}" '
            f'y2="{Y(yb):.2f}" stroke="gray" stroke-dasharray="5,4"/>'
        )
        out.append(
            f'<text x="{X(xb) + 4:.2f}" y="{Y(yb):.2f}" font-size="11" '
            f'fill="gray">slope {s:g}</text>'
        )
    path_pts = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in pts)
    out.append(
        f'<polyline points="{path_pts}" fill="none" stroke="steelblue" stroke-width="1"/>'
    )
    for x, y in pts:
        out.append(
            f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="3.5" fill="steelblue"/>'
        )
    out.append("</svg>")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(out) + "\n")


# --------------------------------------------------------------------------
# CLI
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="medlattice",
        description=(
            "Median lattice approximation benchmark: run the algorithm on the "
            "built-in test functions across evaluation budgets and report "
            "exact L2 errors"
        ),
    )
    p.add_argument("--function", choices=("f1", "f2", "exp"), default="f1")
    p.add_argument("--alpha", type=float, default=None,
                   help="smoothness parameter (default depends on --function)")
    p.add_argument("--gamma", default=None,
                   help='comma list "1,0.5,..." or decay spec "poly:beta" (default all ones)')
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--budgets", default=None,
                   help="comma list of power-of-2 exponents, default 10..18")
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--runs", type=int, default=1, help="runs per budget")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--fig", type=int, choices=(1, 2, 3), default=1,
                   help="1: error vs M; 2: error vs N_star; 3: N_star vs M")
    p.add_argument("--svg", default=None, help="also write an SVG plot here")
    p.add_argument("--workers", type=int, default=1,
                   help="threads for the repetition loop")
    return p


def _config_from_args(args) -> ExperimentConfig:
    if args.budgets is not None:
        budgets = tuple(2 ** int(e) for e in args.budgets.split(","))
    else:
        budgets = tuple(2**e for e in DEFAULT_BUDGET_EXPONENTS)
    return ExperimentConfig(
        function=args.function,
        alpha=args.alpha,
        gammas=args.gamma,
        dim=args.dim,
        delta=args.delta,
        budgets=budgets,
        seed=args.seed,
        runs_per_budget=args.runs,
        out=args.out,
        workers=args.workers,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    alpha = config.resolved_alpha()

    if args.fig == 3:
        exps = (
            tuple(int(e) for e in args.budgets.split(","))
            if args.budgets is not None
            else FIG3_EXPONENTS
        )
        rows = figure3_table(config, exponents=exps)
        text = emit_figure3_csv(config, rows)
        if config.out:
            with open(config.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if args.svg:
            write_svg_scatter(
                args.svg,
                [(r.M, r.N_star) for r in rows if r.N_star > 0],
                xlabel="M",
                ylabel="N_star",
            )
        return 0

    records = run_experiment(config)
    if not config.out:
        sys.stdout.write(emit_csv(config, records, _selections_for(config)))
    feasible = [r for r in records if r.feasible and r.squared_L2_error is not None]
    usable = [r for r in feasible if r.squared_L2_error > 0]
    if len(usable) >= 3:
        errs = [math.sqrt(r.squared_L2_error) for r in usable]
        vs_M = fit_rate(list(zip((r.M for r in usable), errs)))
        vs_Nstar = fit_rate(list(zip((r.N_star for r in usable), errs)))
        print(
            f"rate vs M:      slope {vs_M.slope:+.4f}  (R^2 {vs_M.r_squared:.4f})",
            file=sys.stderr,
        )
        print(
            f"rate vs N_star: slope {vs_Nstar.slope:+.4f}  (R^2 {vs_Nstar.r_squared:.4f})",
            file=sys.stderr,
        )
    if args.svg:
        if args.fig == 2:
            pts = [(r.N_star, math.sqrt(r.squared_L2_error)) for r in usable]
            xlabel = "N_star"
        else:
            pts = [(r.M, math.sqrt(r.squared_L2_error)) for r in usable]
            xlabel = "M"
        write_svg_scatter(
            args.svg,
            pts,
            xlabel=xlabel,
            ylabel="L2 error",
            ref_slopes=(-alpha / 2.0, -3.0 * alpha / 4.0, -alpha),
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
