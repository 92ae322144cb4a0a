"""Command-line front end.

Subcommands: bounds, theta-table, count-curve, count-sums, detlab, xi-sum,
fit.  Every experiment is described by a single config (JSON file via
--config, flags override fields), runs deterministically given the config
and worker count, and emits CSV or JSON.  Every number in the output is
reproducible by a direct library call with the same parameters.

Exit codes: 0 success, 2 config error, 3 guard violation.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import random
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import arith, bounds, counters, detlab, forms

__all__ = ["ExperimentConfig", "ConfigError", "run_theta_table", "run_experiment", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass
class ExperimentConfig:
    """One experiment: which command, its inputs, grids, guards and output."""

    command: str
    form: str | None = None
    box: tuple[float, float, float] | None = None
    k: int | None = None
    x_grid: tuple[int, ...] = ()
    eps: float = 0.01
    degree: int | None = None
    cap_a: float | None = None
    prime_cap: int = 60
    workers: int = 1
    out: str | None = None
    json_out: bool = False
    method: str = "naive"
    sweep: int = 0
    seed: int = 0
    theta: float | None = None
    infile: str | None = None
    column: str = "nontrivial"

    def validate(self) -> None:
        if self.eps <= 0:
            raise ConfigError("eps must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.prime_cap < 3:
            raise ConfigError("prime-cap must be at least 3")
        if self.method not in ("naive", "pipeline", "both"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.box is not None:
            if len(self.box) != 3 or not (1 <= self.box[0] <= self.box[1] <= self.box[2]):
                raise ConfigError("box must be P1,P2,P3 with 1 <= P1 <= P2 <= P3")
        if any(x < 1 for x in self.x_grid):
            raise ConfigError("x-grid entries must be positive")


def _parse_box(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"box must have three comma-separated entries, got {text!r}")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad box entry in {text!r}") from exc
    return vals  # type: ignore[return-value]


def _parse_grid(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad x-grid {text!r}") from exc


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config document must be a JSON object")
    merged = dict(base)
    merged["command"] = args.command
    for key in (
        "form", "k", "eps", "degree", "cap_a", "prime_cap", "workers",
        "out", "method", "sweep", "seed", "theta", "infile", "column",
    ):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if getattr(args, "box", None) is not None:
        merged["box"] = _parse_box(args.box)
    elif "box" in merged and merged["box"] is not None:
        merged["box"] = tuple(float(v) for v in merged["box"])
    if getattr(args, "x_grid", None) is not None:
        merged["x_grid"] = _parse_grid(args.x_grid)
    elif "x_grid" in merged:
        merged["x_grid"] = tuple(int(v) for v in merged["x_grid"])
    if getattr(args, "json", False):
        merged["json_out"] = True
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    cfg = ExperimentConfig(**merged)
    cfg.validate()
    return cfg


def _write_text(cfg: ExperimentConfig, text: str) -> None:
    """Atomic write: a failed run never leaves a partial output file."""
    if cfg.out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(cfg.out))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, cfg.out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _require(cfg: ExperimentConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) in (None, (), ""):
            raise ConfigError(f"{cfg.command} requires --{name.replace('_', '-')}")


# ---------------------------------------------------------------------------
# subcommands

THETA_ROW_LABELS = (
    "5/3",
    "3/sqrt(k)+2/(k-1)",
    "3/sqrt(k)+2/k",
    "3/2+1/(2k-2)",
)


def run_theta_table(ks: tuple[int, ...] = (4, 5, 6, 7, 8)) -> list[list]:
    """Rows of paucity exponents, one per bound, columns over k."""
    cols = [bounds.paucity_exponents(k).as_tuple() for k in ks]
    return [
        [THETA_ROW_LABELS[r], *[cols[i][r] for i in range(len(ks))]]
        for r in range(4)
    ]


def _cmd_theta_table(cfg: ExperimentConfig) -> None:
    ks = (4, 5, 6, 7, 8)
    rows = run_theta_table(ks)
    if cfg.json_out:
        doc = {
            "columns": [f"theta_{k}" for k in ks],
            "rows": [{"bound": r[0], "values": r[1:]} for r in rows],
        }
        _write_text(cfg, json.dumps(doc, indent=2) + "\n")
        return
    header = ["bound", *[f"theta_{k}" for k in ks]]
    out_rows = [[r[0], *[f"{v:.6f}" for v in r[1:]]] for r in rows]
    _write_text(cfg, _csv_text(header, out_rows))


def _profile_reports(profile: bounds.BoxProfile) -> list[bounds.BoundReport]:
    return [
        bounds.bound_box_product(profile),
        bounds.bound_thin_box(profile),
        bounds.bound_lopsided(profile),
    ]


def _cmd_bounds(cfg: ExperimentConfig) -> None:
    if cfg.sweep > 0:
        rng = random.Random(cfg.seed)
        header = ["alpha", "beta", "tau", "d", "box_product", "thin_box", "lopsided", "lopsided_applicable"]
        rows = []
        for _ in range(cfg.sweep):
            d = cfg.degree if cfg.degree else rng.randint(2, 8)
            alpha = rng.uniform(0.0, 0.5)
            beta = rng.uniform(alpha, min(1 - alpha, 0.95))
            tau = rng.uniform(beta + 0.01, 1.0)
            profile = bounds.BoxProfile(alpha=alpha, beta=beta, tau=tau, degree=d)
            rep = _profile_reports(profile)
            rows.append(
                [repr(alpha), repr(beta), repr(tau), d]
                + [repr(rep[0].exponent), repr(rep[1].exponent), repr(rep[2].exponent)]
                + [int(rep[2].applicable)]
            )
        _write_text(cfg, _csv_text(header, rows))
        return
    _require(cfg, "form", "box")
    form = forms.parse_form(cfg.form)
    profile = bounds.make_profile(form, cfg.box)
    reports = _profile_reports(profile)
    doc = {
        "profile": {
            "alpha": profile.alpha,
            "beta": profile.beta,
            "tau": profile.tau,
            "degree": profile.degree,
            "T": profile.t_value,
            "f_triple": list(profile.f_triple or ()),
            "t_tied": profile.t_tied,
        },
        "reports": [r.to_dict() for r in reports],
    }
    if profile.box is not None and profile.box[0] > 1 and profile.f_triple and profile.f_triple[2] != 0:
        pert = bounds.perturb(form, cfg.box, cfg.eps)
        gap = bounds.perturbation_gap(profile, pert.kappa, cfg.eps)
        doc["perturbation"] = {
            "kappa": [pert.kappa.numerator, pert.kappa.denominator],
            "delta": pert.delta,
            "log_b": list(pert.log_b),
            "log_tprime": pert.log_tprime,
            "gap": gap.gap,
            "gap_within_eps": gap.gap <= cfg.eps,
        }
    if cfg.json_out or cfg.out is None:
        _write_text(cfg, json.dumps(doc, indent=2) + "\n")
    else:
        header = ["bound", "exponent", "applicable", "diagnostics"]
        rows = [[r.bound, repr(r.exponent), int(r.applicable), r.diagnostics] for r in reports]
        _write_text(cfg, _csv_text(header, rows))


def _cmd_count_curve(cfg: ExperimentConfig) -> None:
    _require(cfg, "form", "box")
    form = forms.parse_form(cfg.form)
    res = counters.count_curve_bruteforce(form, cfg.box)
    if cfg.json_out:
        doc = dataclasses.asdict(res)
        _write_text(cfg, json.dumps(doc, indent=2) + "\n")
        return
    header = ["label", "form", "P1", "P2", "P3", "total", "trivial", "nontrivial", "elapsed"]
    box = res.params["box"]
    rows = [[res.label, res.params["form"], *box, res.total, res.trivial, res.nontrivial, f"{res.elapsed:.3f}"]]
    _write_text(cfg, _csv_text(header, rows))


def _cmd_count_sums(cfg: ExperimentConfig) -> None:
    _require(cfg, "k")
    grid = cfg.x_grid or (50, 100, 150, 200)
    methods = ("naive", "pipeline") if cfg.method == "both" else (cfg.method,)
    header = ["label", "k", "X", "total", "trivial", "nontrivial", "elapsed"]
    rows = []
    for X in grid:
        for method in methods:
            if method == "naive":
                res = counters.count_sums_naive(cfg.k, X, workers=cfg.workers)
            else:
                res = counters.count_sums_pipeline(cfg.k, X, workers=cfg.workers)
            rows.append([res.label, cfg.k, X, res.total, res.trivial, res.nontrivial, f"{res.elapsed:.3f}"])
    if cfg.json_out:
        doc = [dict(zip(header, r)) for r in rows]
        _write_text(cfg, json.dumps(doc, indent=2) + "\n")
        return
    _write_text(cfg, _csv_text(header, rows))


def _cmd_detlab(cfg: ExperimentConfig) -> None:
    _require(cfg, "form", "box", "degree")
    form = forms.parse_form(cfg.form)
    ibox = tuple(int(v) for v in cfg.box)
    b = tuple(math.log(v) for v in ibox)
    cap = cfg.cap_a
    if cap is None:
        cap = cfg.degree * (b[1] + b[2]) / 2  # midpoint of the admissible window
    demo = detlab.vanishing_demo(form, ibox, cfg.degree, cap, prime_cap=cfg.prime_cap)
    doc = {
        "form": str(form),
        "box": list(ibox),
        "D": cfg.degree,
        "A": cap,
        "E": demo.traces[0].E if demo.traces else 0,
        "threshold_log_p": demo.threshold_log_p,
        "suggested_p": demo.suggested_p,
        "max_nonzero_p": demo.max_nonzero_p,
        "min_all_zero_p": demo.min_all_zero_p,
        "margin": demo.margin,
        "traces": [tr.to_dict() for tr in demo.traces],
    }
    _write_text(cfg, json.dumps(doc, indent=2) + "\n")


def _cmd_xi_sum(cfg: ExperimentConfig) -> None:
    theta = cfg.theta
    if theta is None:
        if cfg.k is None:
            raise ConfigError("xi-sum needs --theta or --k (theta = (1 + 1/(k-1))/2)")
        theta = 0.5 * (1 + 1 / (cfg.k - 1))
    grid = cfg.x_grid or (10**3, 10**4, 10**5, 10**6)
    grid = tuple(sorted(grid))
    partials = arith.xi_partial_sums(theta, list(grid))
    top = arith.xi_sum(theta, grid[-1], cfg.eps)
    slope = None
    if len(grid) >= 3:
        slope = counters.fit_exponent(list(zip(grid, partials))).slope
    header = ["Y", "partial_sum", "bound"]
    rows = [
        [y, repr(s), repr(top.c_eps * y ** (1 - theta + cfg.eps))]
        for y, s in zip(grid, partials)
    ]
    if cfg.json_out:
        doc = {
            "theta": theta,
            "eps": cfg.eps,
            "c_eps": top.c_eps,
            "slope": slope,
            "rows": [dict(zip(header, r)) for r in rows],
        }
        _write_text(cfg, json.dumps(doc, indent=2) + "\n")
        return
    _write_text(cfg, _csv_text(header, rows))


def _cmd_fit(cfg: ExperimentConfig) -> None:
    _require(cfg, "infile")
    with open(cfg.infile, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ConfigError("fit input has no header row")
        xcol = "X" if "X" in reader.fieldnames else "Y"
        if xcol not in reader.fieldnames or cfg.column not in reader.fieldnames:
            raise ConfigError(
                f"fit input must have an X (or Y) column and a {cfg.column!r} column"
            )
        samples = [(float(row[xcol]), float(row[cfg.column])) for row in reader]
    res = counters.fit_exponent(samples)
    _write_text(
        cfg,
        json.dumps(
            {"slope": res.slope, "intercept": res.intercept, "n_used": res.n_used},
            indent=2,
        )
        + "\n",
    )


_HANDLERS = {
    "theta-table": _cmd_theta_table,
    "bounds": _cmd_bounds,
    "count-curve": _cmd_count_curve,
    "count-sums": _cmd_count_sums,
    "detlab": _cmd_detlab,
    "xi-sum": _cmd_xi_sum,
    "fit": _cmd_fit,
}


def run_experiment(cfg: ExperimentConfig) -> int:
    cfg.validate()
    handler = _HANDLERS.get(cfg.command)
    if handler is None:
        raise ConfigError(f"unknown command {cfg.command!r}")
    handler(cfg)
    return EXIT_OK


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file; flags override its fields")
    sp.add_argument("--out", help="output path (written atomically)")
    sp.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    sp.add_argument("--workers", type=int, help="worker processes for the counters")
    sp.add_argument("--eps", type=float, help="epsilon parameter (default 0.01)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxpoints",
        description=(
            "Exponent bounds and exact counters for integer points on plane "
            "curves in lopsided boxes, plus equal-sums-of-two-powers experiments."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="evaluate the exponent bounds for a form and box, or sweep random profiles")
    p.add_argument("--form", help="form text, e.g. 'x1^2*x3 - x2^3', or JSON term list")
    p.add_argument("--box", help="P1,P2,P3")
    p.add_argument("--sweep", type=int, help="emit a CSV sweep over this many random profiles")
    p.add_argument("--seed", type=int, help="seed for the sweep (default 0)")
    p.add_argument("--degree", type=int, help="fix the degree during sweeps")
    _add_common(p)

    p = sub.add_parser("theta-table", help="print the table of paucity exponents for k = 4..8")
    _add_common(p)

    p = sub.add_parser("count-curve", help="exact count of primitive box points on a curve")
    p.add_argument("--form")
    p.add_argument("--box", help="P1,P2,P3 (integers)")
    _add_common(p)

    p = sub.add_parser("count-sums", help="exact equal-sums counts over an X grid")
    p.add_argument("--k", type=int)
    p.add_argument("--x-grid", dest="x_grid", help="comma-separated X values (default 50,100,150,200)")
    p.add_argument("--method", choices=["naive", "pipeline", "both"], help="counter choice (default naive)")
    _add_common(p)

    p = sub.add_parser("detlab", help="determinant-method trace over a sweep of primes")
    p.add_argument("--form")
    p.add_argument("--box", help="B1,B2,B3 (integers)")
    p.add_argument("--degree", type=int, help="auxiliary degree D")
    p.add_argument("--cap-a", dest="cap_a", type=float, help="weighted size cap A (default: window midpoint)")
    p.add_argument("--prime-cap", dest="prime_cap", type=int, help="sweep odd primes up to this bound (default 60)")
    _add_common(p)

    p = sub.add_parser("xi-sum", help="kernel-sum growth against its Euler-product bound")
    p.add_argument("--k", type=int, help="take theta = (1 + 1/(k-1))/2")
    p.add_argument("--theta", type=float, help="explicit exponent (overrides --k)")
    p.add_argument("--x-grid", dest="x_grid", help="comma-separated Y values")
    _add_common(p)

    p = sub.add_parser("fit", help="least-squares slope of log(count) against log(X) from a CSV")
    p.add_argument("infile", help="CSV with an X (or Y) column")
    p.add_argument("--column", help="count column to fit (default nontrivial)")
    _add_common(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        return run_experiment(cfg)
    except counters.GuardExceeded as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, forms.FormSyntaxError, forms.InhomogeneityError,
            forms.ZeroFormError, bounds.RegimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
