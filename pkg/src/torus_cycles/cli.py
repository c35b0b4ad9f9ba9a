"""Command-line front end.

    torus-cycles cycle-prob --model gr --sigma inf --d 1 --r 0.1 --q 3
    torus-cycles threshold --quantity hamilton --model both --d 2 --sigma 2 --n-min 4 --n-max 20
    torus-cycles spectral --n 20 --sweep 0 1 1001 --quantity det --model both --d 3 --sigma inf
    torus-cycles plot --figure 2 --plot fig2.svg

Exit codes: 0 ok, 2 usage/validation, 3 numerical failure, 4 capacity.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import oracle
from .cycleprob import DEFAULT_TOL, ER, GR, SeriesValue, theta
from .errors import CapacityError, NoThreshold, NumericalFailure
from .geometry import BallSpec, parse_sigma, r_from_p, sigma_label
from .output import Axes, Series, emit_csv, emit_svg
from .specfun import psi_counts
from .spectral import (
    DEFAULT_PRECISION,
    GAMMA,
    LAMBDA,
    SPECTRAL_KMAX_2,
    THETA_RTOL,
    ERFamily,
    GRFamily,
    esf_table,
    expected_value_at,
    gamma_poly,
    hamilton_expectation,
    lambda_poly,
    threshold,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CAPACITY = 0, 2, 3, 4


class UsageError(ValueError):
    pass


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _info(msg: str) -> None:
    print(f"# {msg}", file=sys.stderr)


def _parse_p(text: str):
    return Fraction(text) if "/" in text else float(text)


def _sigma_arg(text: str) -> float:
    try:
        return parse_sigma(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p: argparse.ArgumentParser, both: bool = False) -> None:
    p.add_argument("--model", choices=["er", "gr", "both"] if both else ["er", "gr"], default="er")
    p.add_argument("--p", type=_parse_p, help="edge probability (ER, or GR via r = r(p))")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--sigma", type=_sigma_arg, default=math.inf, help="2 or inf")
    p.add_argument("--r", type=float)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--precision-bits", type=int, default=DEFAULT_PRECISION)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", help="CSV destination (default stdout)")
    p.add_argument("--plot", help="also write an SVG chart here")
    p.add_argument("--mc-fallback", action="store_true",
                   help="use Monte Carlo where a cycle series does not converge")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torus-cycles", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cycle-prob", help="labeled q-cycle probability")
    _common(p)
    p.add_argument("--q", type=int, nargs="+", required=True)

    p = sub.add_parser("hamilton", help="expected number of Hamilton cycles")
    _common(p)
    p.add_argument("--n", type=int, nargs="+", required=True)

    p = sub.add_parser("threshold", help="edge probability where an expectation reaches 1")
    _common(p, both=True)
    p.add_argument("--quantity", choices=["hamilton", "permanent"], default="hamilton")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--width", type=float, default=1e-6)

    p = sub.add_parser("spectral", help="expected det/per polynomials, ESFs, sweeps")
    _common(p, both=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kind", choices=["lambda", "gamma", "esf"], default="lambda")
    p.add_argument("--exact", action="store_true", help="rational arithmetic (ER, p like 1/4)")
    p.add_argument("--sweep", nargs=3, metavar=("START", "STOP", "POINTS"),
                   help="sweep edge probability and report E det or E per")
    p.add_argument("--quantity", choices=["det", "per"], default="det")

    p = sub.add_parser("mc", help="Monte Carlo oracle")
    _common(p)
    p.add_argument("--what", choices=["cycle", "matrix", "maxdet"], default="cycle")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--n", type=int, default=5)

    p = sub.add_parser("psi", help="sum-of-squares lattice counts")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("plot", help="render one of the four standard charts (CSV + SVG)")
    _common(p)
    p.add_argument("--figure", type=int, choices=[1, 2, 3, 4], required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--log", action="store_true", help="log-scale the y axis")

    p = sub.add_parser("selftest", help="run the oracle cross-checks")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=200_000)
    return parser


# ---------------------------------------------------------------- helpers

def _seed(args) -> int:
    return oracle.default_seed() if args.seed is None else args.seed


def _gr_model(args) -> GR:
    if args.r is not None:
        return GR(BallSpec(args.d, args.sigma, args.r))
    if args.p is None:
        raise UsageError("GR model needs --r or --p")
    return GR(BallSpec(args.d, args.sigma, r_from_p(args.d, args.sigma, float(args.p))))


def _single_model(args):
    if args.model == "er":
        if args.p is None:
            raise UsageError("ER model needs --p")
        return ER(args.p)
    if args.model == "gr":
        return _gr_model(args)
    raise UsageError("this subcommand needs --model er or --model gr")


def _families(args) -> list:
    fams = []
    if args.model in ("er", "both"):
        fams.append(ERFamily())
    if args.model in ("gr", "both"):
        fams.append(GRFamily(args.d, args.sigma))
    return fams


def _model_cols(model) -> list:
    if isinstance(model, ER):
        return ["er", None, None, None, model.p]
    s = model.spec
    return ["gr", s.d, sigma_label(s.sigma), s.r, model.edge_probability]


def _pmap(fn, items, threads):
    items = list(items)
    if threads and threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _theta_with_fallback(model, q: int, args, tol: float, relative: bool,
                         k_max: int | None = None) -> tuple[object, str]:
    sv = theta(model, q, tol, k_max or args.k_max, relative=relative)
    if sv.converged:
        return sv.value, "series"
    if not args.mc_fallback:
        raise NumericalFailure(
            f"series for q={q} did not reach tol={tol:g} within {sv.terms_used} terms "
            f"(bound {sv.truncation_bound:.3g}); rerun with --mc-fallback or a looser --tol", q=q)
    _warn(f"series for q={q} did not converge; using Monte Carlo with {args.samples} samples")
    est = oracle.mc_cycle_prob(model.spec, q, args.samples, _seed(args), args.threads or 1)
    return est.mean, "monte-carlo"


def _thetas(model, n: int, args):
    """Cycle probabilities for the recurrences, honouring --mc-fallback."""
    if isinstance(model, ER):
        return None
    tol = args.tol if args.tol is not None else THETA_RTOL
    spec = model.spec
    k_max = args.k_max or (SPECTRAL_KMAX_2 if spec.sigma == 2.0 and spec.d > 1 else None)
    return {q: _theta_with_fallback(model, q, args, tol, True, k_max)[0] for q in range(2, n + 1)}


def _write(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_svg(path: str | None, series, axes) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(emit_svg(series, axes))


def det_bounds(n: int) -> tuple[float, int]:
    """(n+1)^((n+1)/2)/2^n for general 0/1 matrices; (n-3) 3^(floor(n/4)-1) for (n-3)-regular graphs."""
    general = (n + 1) ** ((n + 1) / 2) / 2**n
    regular = (n - 3) * 3 ** (n // 4 - 1) if n >= 7 else None
    return general, regular


# ---------------------------------------------------------------- subcommands

def cmd_cycle_prob(args) -> int:
    model = _single_model(args)
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    rows = []
    for q in args.q:
        if isinstance(model, ER):
            sv, method = theta(model, q), "closed-form"
        else:
            sv = theta(model, q, tol, args.k_max)
            method = "series"
            if not sv.converged:
                value, method = _theta_with_fallback(model, q, args, tol, False)
                sv = SeriesValue(value, sv.truncation_bound, sv.terms_used, False)
        rows.append(_model_cols(model) + [q, sv.value, sv.truncation_bound, sv.terms_used,
                                          sv.converged, method])
    schema = ["model", "d", "sigma", "r", "p", "q", "value", "truncation_bound", "terms_used",
              "converged", "method"]
    _write(args, emit_csv(rows, schema))
    return EXIT_OK


def cmd_hamilton(args) -> int:
    model = _single_model(args)
    rows = []
    for n in args.n:
        if isinstance(model, ER):
            tau = hamilton_expectation(model, n, args.precision_bits)
        else:
            th = _thetas(model, n, args)
            tau = th[n] * (math.factorial(n - 1) // 2)
        rows.append([n, model.edge_probability, tau])
    _write(args, emit_csv(rows, ["n", "edge_probability", "tau"]))
    return EXIT_OK


def _threshold_job(job):
    family, n, quantity, width, bits, tol = job
    try:
        return threshold(family, n, quantity, width, bits, tol)
    except NoThreshold as exc:
        return exc


def _threshold_table(args, families, ns, quantity):
    tol = args.tol if args.tol is not None else THETA_RTOL
    jobs = [(f, n, quantity, getattr(args, "width", 1e-6), args.precision_bits, tol)
            for n in ns for f in families]
    results = _pmap(_threshold_job, jobs, args.threads)
    table = {}
    for (f, n, *_), res in zip(jobs, results):
        if isinstance(res, NoThreshold):
            _warn(f"{f.label}, n={n}: {res}")
            table[(f.label, n)] = None
        else:
            table[(f.label, n)] = res
    return table


def cmd_threshold(args) -> int:
    ns = args.n or list(range(args.n_min, args.n_max + 1))
    families = _families(args)
    table = _threshold_table(args, families, ns, args.quantity)
    rows = []
    for n in ns:
        for f in families:
            res = table[(f.label, n)]
            rows.append([n, args.quantity, f.label, res and res.edge_probability,
                         res and res.bracket_width])
    _write(args, emit_csv(rows, ["n", "quantity", "model", "edge_probability", "bracket_width"]))
    if args.plot:
        series = [Series(f.label, ns, [table[(f.label, n)] and table[(f.label, n)].edge_probability
                                       for n in ns]) for f in families]
        _write_svg(args.plot, series, Axes(f"{args.quantity} threshold", "n", "edge probability"))
    return EXIT_OK


def _sweep_job(job):
    family, n, p, kind, bits, tol = job
    if p <= 0:
        return 0.0 if n > 0 else 1.0
    try:
        model = family.model(p)
    except ValueError:
        return None
    try:
        return float(expected_value_at(model, n, kind, 0, bits, tol))
    except NumericalFailure as exc:
        _warn(f"{family.label}, p={p:g}: {exc}; point left blank")
        return None


def sweep_table(families, n: int, ps, kind: str, bits: int, tol: float, threads=None):
    jobs = [(f, n, p, kind, bits, tol) for p in ps for f in families]
    flat = _pmap(_sweep_job, jobs, threads)
    k = len(families)
    return [flat[i * k:(i + 1) * k] for i in range(len(ps))]


def _grid(start: float, stop: float, points: int) -> list[float]:
    if points < 2 or not start < stop:
        raise UsageError("sweep needs START < STOP and POINTS >= 2")
    return [start + (stop - start) * i / (points - 1) for i in range(points)]


def cmd_spectral(args) -> int:
    if args.sweep:
        start, stop, points = float(args.sweep[0]), float(args.sweep[1]), int(args.sweep[2])
        ps = _grid(start, stop, points)
        families = _families(args)
        kind = LAMBDA if args.quantity == "det" else GAMMA
        tol = args.tol if args.tol is not None else THETA_RTOL
        vals = sweep_table(families, args.n, ps, kind, args.precision_bits, tol, args.threads)
        schema = ["p"] + [f.label for f in families]
        _write(args, emit_csv([[p] + v for p, v in zip(ps, vals)], schema))
        if args.quantity == "det":
            general, regular = det_bounds(args.n)
            _info(f"general 0/1 determinant bound (n+1)^((n+1)/2)/2^n = {general:.6g}")
            if regular is not None:
                _info(f"maximal det of (n-3)-regular graphs (n-3)*3^(floor(n/4)-1) = {regular}")
        if args.plot:
            series = [Series(f.label, ps, [v[i] for v in vals]) for i, f in enumerate(families)]
            _write_svg(args.plot, series, Axes(f"expected {args.quantity}, n={args.n}",
                                               "edge probability", f"E {args.quantity}"))
        return EXIT_OK

    model = _single_model(args)
    bits = None if args.exact else args.precision_bits
    if args.exact and not isinstance(model, ER):
        raise UsageError("--exact needs --model er")
    thetas = None if isinstance(model, ER) else _thetas(model, args.n, args)
    if args.kind == "esf":
        table = esf_table(model, args.n, bits, thetas=thetas)
        rows = [[k, v] for k, v in enumerate(table.values)]
        schema = ["k", "expected_esf"]
    else:
        fn = lambda_poly if args.kind == "lambda" else gamma_poly
        poly = fn(model, args.n, bits, thetas=thetas)
        rows = [[k, c] for k, c in enumerate(poly.coeffs)]
        schema = ["power", "coefficient"]
    if args.exact:
        rows = [[k, str(v)] for k, v in rows]
    _write(args, emit_csv(rows, schema))
    return EXIT_OK


def cmd_mc(args) -> int:
    seed = _seed(args)
    workers = args.threads or 1
    if args.what == "cycle":
        spec = _gr_model(args).spec
        est = oracle.mc_cycle_prob(spec, args.q, args.samples, seed, workers)
        rows = [["cycle", est.mean, est.stderr, est.samples, est.seed]]
    elif args.what == "matrix":
        model = _single_model(args)
        det, per = oracle.mc_matrix_expectations(model, args.n, args.samples, seed, workers)
        rows = [["det", det.mean, det.stderr, det.samples, det.seed],
                ["per", per.mean, per.stderr, per.samples, per.seed]]
    else:
        model = _single_model(args)
        best, _ = oracle.mc_max_abs_det(model, args.n, args.samples, seed)
        rows = [["max_abs_det", best, None, args.samples, seed]]
    _write(args, emit_csv(rows, ["quantity", "mean", "stderr", "samples", "seed"]))
    return EXIT_OK


def cmd_psi(args) -> int:
    table = psi_counts(args.d, args.k_max)
    _write(args, emit_csv([[k, c] for k, c in enumerate(table.counts)], ["k", "count"]))
    return EXIT_OK


FIGURES = {
    1: dict(kind="threshold", quantity="hamilton", d=2, sigma=2.0,
            title="Threshold for expected Hamilton cycles >= 1"),
    2: dict(kind="sweep", quantity="det", d=3, sigma=math.inf,
            title="Expected determinant"),
    3: dict(kind="sweep", quantity="per", d=1, sigma=math.inf,
            title="Expected permanent"),
    4: dict(kind="threshold", quantity="permanent", d=2, sigma=math.inf,
            title="Threshold for expected permanent >= 1"),
}


def cmd_plot(args) -> int:
    fig = FIGURES[args.figure]
    families = [ERFamily(), GRFamily(fig["d"], fig["sigma"])]
    tol = args.tol if args.tol is not None else THETA_RTOL
    path = args.plot or f"figure{args.figure}.svg"
    if fig["kind"] == "threshold":
        ns = list(range(args.n_min, args.n_max + 1))
        table = _threshold_table(args, families, ns, fig["quantity"])

        def col(f):
            return [table[(f.label, n)] and table[(f.label, n)].edge_probability for n in ns]

        cols = [col(f) for f in families]
        rows = [[n] + [c[i] for c in cols] for i, n in enumerate(ns)]
        _write(args, emit_csv(rows, ["n", "threshold_er", "threshold_gr"]))
        series = [Series(f.label, ns, c) for f, c in zip(families, cols)]
        _write_svg(path, series, Axes(fig["title"], "n", "edge probability"))
        return EXIT_OK
    kind = LAMBDA if fig["quantity"] == "det" else GAMMA
    ps = _grid(0.0, 1.0, args.points)
    vals = sweep_table(families, args.n, ps, kind, args.precision_bits, tol, args.threads)
    rows = [[p] + v for p, v in zip(ps, vals)]
    _write(args, emit_csv(rows, ["p", "er", "gr"]))
    logy = args.log or fig["quantity"] == "per"
    notes = []
    if fig["quantity"] == "det":
        general, regular = det_bounds(args.n)
        notes.append(f"general 0/1 bound {general:.4g}")
        if regular is not None:
            notes.append(f"(n-3)-regular max {regular}")
    series = [Series(f.label, ps, [v[i] for v in vals]) for i, f in enumerate(families)]
    _write_svg(path, series, Axes(f"{fig['title']}, n={args.n}", "edge probability",
                                  f"E {fig['quantity']}", logy=logy, notes=notes))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return EXIT_OK if run_selftest(_seed(args), args.samples) else 1


COMMANDS = {
    "cycle-prob": cmd_cycle_prob,
    "hamilton": cmd_hamilton,
    "threshold": cmd_threshold,
    "spectral": cmd_spectral,
    "mc": cmd_mc,
    "psi": cmd_psi,
    "plot": cmd_plot,
    "selftest": cmd_selftest,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (NoThreshold, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
