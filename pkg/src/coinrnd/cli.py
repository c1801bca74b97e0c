"""Command-line front end: ``coinrnd {atm,fit,pd,smile,bl,validate,synth}``.

Tables go to stdout as CSV (default) or JSON; diagnostics go to stderr.
Exit status is 0 on success, 2 when only some maturities could be
processed, and 1 when nothing usable came out.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from . import oracle
from .calibration import FitMode, PriceUnits
from .density import (
    MINUTES_PER_YEAR,
    CurveKind,
    PriceCurve,
    Side,
    bl_cdf,
    bl_pdf,
    implied_vol,
)
from .errors import CoinRndError, NoSolution
from .logistic import STRIKE_SCALE, LogisticParams, cdf, implied_pd, pdf
from .market_data import (
    Kind,
    dump_snapshot,
    filter_chain,
    format_maturity,
    load_snapshot,
    maturities,
    parse_maturity,
)
from .parity import estimate_atm, synthetic_forward_points
from .pipeline import analyse_snapshot, atm_series, fits_by_time
from .validation import fit_eta, forward_returns, ks_uniform, pit_transform, qq_points

EXIT_OK, EXIT_FAIL, EXIT_PARTIAL = 0, 1, 2
MIN_VALIDATE_SNAPSHOTS = 30

FIT_COLUMNS = ["snapshot_time", "maturity", "atm", "ipd_pct", "m", "s", "a",
               "res_x1000", "spr_x1000", "s_single"]


# -- output ------------------------------------------------------------------


def _clean(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def emit(rows: Sequence[dict], fmt: str, out=None, columns: Sequence[str] | None = None):
    out = sys.stdout if out is None else out
    rows = [{k: _clean(v) for k, v in r.items()} for r in rows]
    if fmt == "json":
        json.dump(rows, out, indent=1)
        out.write("\n")
        return
    columns = list(columns or (rows[0].keys() if rows else []))
    writer = csv.DictWriter(out, fieldnames=columns, lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)


# -- snapshot processing -------------------------------------------------------


def _analyse_file(path, maturity, units, restrict):
    try:
        records = load_snapshot(path)
    except (CoinRndError, OSError) as exc:
        return path, [], [(None, f"{type(exc).__name__}: {exc}")]
    done, failed = analyse_snapshot(records, maturity, units=PriceUnits(units),
                                    restrict_four_source=restrict)
    return path, done, failed


def _analyse_inputs(args):
    maturity = parse_maturity(args.maturity) if args.maturity else None
    jobs = [(p, maturity, args.price_units, args.restrict_four_source) for p in args.input]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_analyse_file, *zip(*jobs)))
    else:
        results = [_analyse_file(*j) for j in jobs]
    analyses, n_failed = [], 0
    for path, done, failed in results:
        analyses.extend(done)
        for mat, msg in failed:
            n_failed += 1
            print(f"{path}: {mat or '-'}: {msg}", file=sys.stderr)
    return analyses, n_failed


def _status(n_ok, n_failed):
    if n_ok == 0:
        return EXIT_FAIL
    return EXIT_PARTIAL if n_failed else EXIT_OK


def _mat(a):
    return format_maturity(a.maturity)


# -- commands --------------------------------------------------------------------


def cmd_atm(args) -> int:
    analyses, n_failed = _analyse_inputs(args)
    rows = [dict(snapshot_time=a.snapshot_time, maturity=_mat(a), atm=a.atm.atm,
                 slope=a.atm.slope, intercept=a.atm.intercept, n_points=a.atm.n_points)
            for a in analyses]
    emit(rows, args.format, columns=["snapshot_time", "maturity", "atm", "slope",
                                     "intercept", "n_points"])
    return _status(len(rows), n_failed)


def fit_row(a) -> dict:
    p = a.fit3.params
    return dict(snapshot_time=a.snapshot_time, maturity=_mat(a), atm=a.atm.atm,
                ipd_pct=100.0 * implied_pd(p), m=p.m, s=p.s, a=p.a,
                res_x1000=a.fit3.res_x1000, spr_x1000=a.fit3.spr_x1000,
                s_single=a.fit1.params.s)


def cmd_fit(args) -> int:
    analyses, n_failed = _analyse_inputs(args)
    rows = [fit_row(a) for a in analyses]
    emit(rows, args.format, columns=FIT_COLUMNS)
    return _status(len(rows), n_failed)


def _read_params(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for i, r in enumerate(rows):
        p = LogisticParams(float(r["m"]), float(r["s"]), float(r.get("a") or 1.0))
        out.append(dict(label=r.get("label") or r.get("maturity") or str(i),
                        m=p.m, s=p.s, a=p.a, ipd_pct=100.0 * implied_pd(p)))
    return out


def cmd_pd(args) -> int:
    rows, n_failed = [], 0
    for path in args.params or []:
        rows.extend(_read_params(path))
    if args.input:
        analyses, n_failed = _analyse_inputs(args)
        mode = FitMode(args.mode)
        for a in analyses:
            p = a.fit(mode).params
            rows.append(dict(label=f"{a.snapshot_time}/{_mat(a)}", m=p.m, s=p.s, a=p.a,
                             ipd_pct=100.0 * implied_pd(p)))
    emit(rows, args.format, columns=["label", "m", "s", "a", "ipd_pct"])
    return _status(len(rows), n_failed)


def cmd_smile(args) -> int:
    maturity = parse_maturity(args.maturity) if args.maturity else None
    rows, n_failed = [], 0
    for path in args.input:
        records = load_snapshot(path)
        mats = [maturity] if maturity else maturities(records)
        for mat in mats:
            try:
                chain = filter_chain(records, mat)
                F = estimate_atm(synthetic_forward_points(chain)).atm
            except CoinRndError as exc:
                n_failed += 1
                print(f"{path}: {mat}: {exc}", file=sys.stderr)
                continue
            tau_years = chain.time_to_maturity / MINUTES_PER_YEAR
            for q in sorted(chain.quotes, key=lambda q: (q.instrument.strike, q.instrument.kind.value)):
                k = q.instrument.strike
                for side, price in ((Side.BID, q.bid), (Side.ASK, q.ask), (Side.MID, q.mid)):
                    call = price if q.instrument.kind is Kind.CALL else price + 1.0 - k / F
                    try:
                        vol = implied_vol(call, F, k, tau_years)
                    except NoSolution:
                        vol = None
                    rows.append(dict(snapshot_time=chain.snapshot_time,
                                     maturity=format_maturity(mat), strike=k,
                                     kind=q.instrument.kind.value, side=side.value,
                                     forward=F, implied_vol=vol))
    emit(rows, args.format, columns=["snapshot_time", "maturity", "strike", "kind",
                                     "side", "forward", "implied_vol"])
    return _status(len(rows), n_failed)


def cmd_bl(args) -> int:
    analyses, n_failed = _analyse_inputs(args)
    mode = FitMode(args.mode)
    rows = []
    for a in analyses:
        if len(a.points) < 3:
            n_failed += 1
            continue
        curve = PriceCurve([p.strike for p in a.points], [p.mid for p in a.points], CurveKind.PUT)
        d1, d2 = bl_cdf(curve), bl_pdf(curve)
        params = a.fit(mode).params
        for k, c, f, flag in zip(d1.strikes, d1.values, d2.values, d2.flagged):
            x = k / STRIKE_SCALE
            rows.append(dict(snapshot_time=a.snapshot_time, maturity=_mat(a), strike=float(k),
                             cdf_estimate=float(c), pdf_estimate=float(f), concave=bool(flag),
                             model_cdf=float(cdf(x, params)), model_pdf=float(pdf(x, params))))
    emit(rows, args.format, columns=["snapshot_time", "maturity", "strike", "cdf_estimate",
                                     "pdf_estimate", "concave", "model_cdf", "model_pdf"])
    return _status(len(rows), n_failed)


def cmd_validate(args) -> int:
    if len(args.input) < MIN_VALIDATE_SNAPSHOTS:
        print(f"validate needs at least {MIN_VALIDATE_SNAPSHOTS} snapshots, "
              f"got {len(args.input)}", file=sys.stderr)
        return EXIT_FAIL
    analyses, n_failed = _analyse_inputs(args)
    mats = sorted({a.maturity for a in analyses})
    if len(mats) != 1:
        print(f"validate needs exactly one maturity (use --maturity), found {len(mats)}",
              file=sys.stderr)
        return EXIT_FAIL
    if len(analyses) < MIN_VALIDATE_SNAPSHOTS:
        print(f"only {len(analyses)} usable snapshots", file=sys.stderr)
        return EXIT_FAIL
    mode = FitMode(args.mode)
    returns = forward_returns(atm_series(analyses))
    fits = fits_by_time(analyses, mode)
    if args.eta == "search":
        eta, report = fit_eta(returns, fits)
        samples = pit_transform(returns, fits, eta)
    else:
        eta = float(args.eta)
        samples = pit_transform(returns, fits, eta)
        report = ks_uniform(samples, eta=eta)
    emit([dict(statistic=report.statistic, p_value=report.p_value, n=report.n, eta=report.eta)],
         args.format, columns=["statistic", "p_value", "n", "eta"])
    if args.qq_out:
        with open(args.qq_out, "w", newline="") as fh:
            emit([dict(uniform_quantile=q, empirical_quantile=e) for q, e in qq_points(samples)],
                 "csv", out=fh)
    return EXIT_PARTIAL if n_failed else EXIT_OK


def _density(spec: str):
    kind, *vals = spec.split(":")
    try:
        vals = [float(v) for v in vals]
    except ValueError:
        vals = []
    if kind == "logistic" and len(vals) == 2:
        return oracle.logistic(*vals)
    if kind == "lognormal" and len(vals) == 2:
        median, sigma = vals
        return oracle.lognormal(math.log(median), sigma)
    raise argparse.ArgumentTypeError(
        f"bad density {spec!r}; use logistic:M:S or lognormal:MEDIAN:SIGMA")


def cmd_synth(args) -> int:
    density = args.density
    lo, hi, step = (int(v) for v in args.strikes.split(":"))
    maturity = parse_maturity(args.maturity)
    records = oracle.gen_chain(density, range(lo, hi + 1, step), args.spread, args.seed,
                               maturity, args.ts)
    if args.output:
        with open(args.output, "w") as fh:
            dump_snapshot(records, fh)
    else:
        dump_snapshot(records, sys.stdout)
    return EXIT_OK


COMMANDS = dict(atm=cmd_atm, fit=cmd_fit, pd=cmd_pd, smile=cmd_smile, bl=cmd_bl,
                validate=cmd_validate, synth=cmd_synth)


def _eta(value: str):
    if value == "search":
        return value
    v = float(value)
    if not v > 0:
        raise argparse.ArgumentTypeError("eta must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    snap = argparse.ArgumentParser(add_help=False)
    snap.add_argument("--input", nargs="+", metavar="PATH", default=[])
    snap.add_argument("--maturity", metavar="DDMMMYY")
    snap.add_argument("--mode", choices=["3p", "1p"], default="3p")
    snap.add_argument("--jobs", type=int, default=1)
    snap.add_argument("--restrict-four-source", action="store_true",
                      help="fit only strikes quoted on both legs")
    snap.add_argument("--price-units", choices=[u.value for u in PriceUnits], default="kusd",
                      help="currency of put prices in the fit (default: kusd)")

    parser = argparse.ArgumentParser(prog="coinrnd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, hlp in [("atm", "ATM level from synthetic forwards"),
                      ("fit", "integrated-sigmoid fits, one row per snapshot and maturity"),
                      ("smile", "lognormal implied vols of every quote"),
                      ("bl", "finite-difference CDF/PDF of the combined put curve")]:
        sub.add_parser(name, parents=[common, snap], help=hlp)
    p = sub.add_parser("pd", parents=[common, snap], help="implied probability of default")
    p.add_argument("--params", nargs="+", metavar="CSV",
                   help="CSV with columns m,s[,a][,label]")
    p = sub.add_parser("validate", parents=[common, snap],
                       help="PIT/KS check of implied laws against ATM returns")
    p.add_argument("--eta", type=_eta, default="search", help="'search' or a fixed factor")
    p.add_argument("--qq-out", metavar="CSV", help="write QQ points here")
    p = sub.add_parser("synth", parents=[common], help="oracle-priced snapshot file")
    p.add_argument("--density", required=True, type=_density, help="logistic:M:S or lognormal:MEDIAN:SIGMA (USD)")
    p.add_argument("--strikes", default="1000:8000:250", help="LO:HI:STEP in USD")
    p.add_argument("--spread", type=float, default=0.0)
    p.add_argument("--maturity", default="29MAR19", metavar="DDMMMYY")
    p.add_argument("--ts", type=int, default=1544501400, help="snapshot UNIX time")
    p.add_argument("--output", metavar="PATH")
    return parser


def main(argv: Iterable[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which here means partial success
        return EXIT_OK if exc.code in (0, None) else EXIT_FAIL
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.command not in ("synth", "pd") and not args.input:
        print("--input is required", file=sys.stderr)
        return EXIT_FAIL
    try:
        return COMMANDS[args.command](args)
    except (CoinRndError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
