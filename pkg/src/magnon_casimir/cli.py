"""Command-line front end: ``magnon-casimir {params,dispersion,regime,sweep,analyze}``.

Data goes to ``--out`` (or stdout); diagnostics go to stderr.  Exit status
is 0 on success, 1 for invalid input and 2 when a quadrature fails its
convergence check.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .analysis import (
    SweepSeries,
    PeriodMethod,
    envelope_period,
    estimate_asymptote,
    measure_period,
    predicted_beat_period,
    predicted_period,
    sign_changes,
    spectral_components,
)
from .casimir import default_exponent, thickness_sweep
from .config import RunConfig, load_config
from .core import MaterialParams, Mode, classify_regime, critical_alpha, derive_params, dispersion
from .errors import (
    InsufficientSpan,
    MagnonCasimirError,
    NoBeat,
    NoEP,
    NotConverged,
    ParseError,
    QuadratureFailure,
    ValidationError,
)
from .serialize import (
    DISPERSION_COLUMNS,
    SWEEP_COLUMNS,
    format_number,
    read_sweep_csv,
    read_sweep_json,
    sweep_rows,
    to_csv,
    to_json,
)

EXIT_OK, EXIT_INVALID, EXIT_QUADRATURE = 0, 1, 2
WORKERS_ENV = "MAGNON_CASIMIR_WORKERS"


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved here
    def error(self, message):
        raise ValidationError("argv", message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH",
                   help="JSON run config, or the name of a bundled preset (default: nio.json)")
    p.add_argument("--alpha", type=float, metavar="X", help="override the configured damping")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--workers", type=int, metavar="N",
                   help=f"worker processes for sweeps (default: ${WORKERS_ENV} or the config)")
    p.add_argument("--seedless", action="store_true",
                   help="reserved; every computation is already deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="magnon-casimir",
                     description="Magnon Casimir energy of damped antiferromagnetic films.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("params", help="derived dispersion constants and critical dampings")
    sub.add_parser("dispersion", help="complex magnon energy along q_x")
    sub.add_parser("regime", help="regime classification and predicted periods")
    sp = sub.add_parser("sweep", help="Casimir energy over a thickness range")
    sp.add_argument("--n-z-min", type=int, help="override sweep.n_z_min")
    sp.add_argument("--n-z-max", type=int, help="override sweep.n_z_max")
    sp.add_argument("--b", type=float, help="override the coefficient exponent")
    an = sub.add_parser("analyze", help="periods, beat, asymptote and sign changes of a sweep")
    an.add_argument("sweep_file", help="CSV or JSON produced by 'sweep'")
    for p in sub.choices.values():
        _common(p)
    return parser


# ---------------------------------------------------------------------------


def _resolve(args) -> RunConfig:
    if args.seedless:
        raise ValidationError("seedless", "--seedless is reserved: no random numbers are used anywhere")
    cfg = load_config(args.config)
    if args.alpha is not None:
        cfg = replace(cfg, alpha=(args.alpha,))
    workers = args.workers
    if workers is None and os.environ.get(WORKERS_ENV):
        try:
            workers = int(os.environ[WORKERS_ENV])
        except ValueError:
            raise ValidationError("workers", f"{WORKERS_ENV} must be an integer") from None
    if workers is not None:
        cfg = replace(cfg, workers=workers)
    if args.format is not None:
        cfg = replace(cfg, output=replace(cfg.output, format=args.format))
    if args.out is not None:
        cfg = replace(cfg, output=replace(cfg.output, path=args.out))
    if getattr(args, "n_z_min", None) is not None or getattr(args, "n_z_max", None) is not None \
            or getattr(args, "b", None) is not None:
        sw = cfg.sweep
        cfg = replace(cfg, sweep=replace(
            sw,
            n_z_min=sw.n_z_min if args.n_z_min is None else args.n_z_min,
            n_z_max=sw.n_z_max if args.n_z_max is None else args.n_z_max,
            b=sw.b if args.b is None else args.b))
    return cfg


def _emit(text: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _per_alpha_path(path: str, alpha: float) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}_alpha{format_number(alpha)}{p.suffix}"))


def _emit_tables(cfg: RunConfig, columns, tables, json_doc):
    """Write one table per alpha (CSV) or a single document (JSON)."""
    out = cfg.output
    if out.format == "json":
        _emit(to_json(json_doc), out.path)
        return
    if len(tables) == 1:
        _emit(to_csv(columns, tables[0][1]), out.path)
        return
    if out.path is None or out.path == "-":
        raise ValidationError("alpha", "CSV output for several alpha values needs --out "
                                       "(one file per alpha) or a single --alpha")
    for alpha, rows in tables:
        target = _per_alpha_path(out.path, alpha)
        _emit(to_csv(columns, rows), target)
        print(f"wrote {target}", file=sys.stderr)


def _meta(cfg: RunConfig) -> dict:
    return {"version": __version__, "config": cfg.to_dict()}


def _text_or(cfg: RunConfig, args, text: str, columns, rows, doc):
    if args.format is None:
        _emit(text, cfg.output.path)
    elif cfg.output.format == "json":
        _emit(to_json(doc), cfg.output.path)
    else:
        _emit(to_csv(columns, rows), cfg.output.path)


# ---------------------------------------------------------------------------


def cmd_params(cfg: RunConfig, args) -> int:
    m = cfg.material
    cols = ("sigma", "alpha", "A_meV", "delta_meV", "D_meV", "C_meV", "gap_term_meV2", "alpha_cri")
    rows, lines, runs = [], [], []
    for alpha in cfg.alpha:
        for sigma in (Mode.PLUS, Mode.MINUS):
            dp = derive_params(m, sigma, alpha)
            a_c = critical_alpha(m, sigma)
            rows.append((sigma.label, alpha, dp.A, dp.delta, dp.D, dp.C, dp.gap_term, a_c))
            runs.append(dict(zip(cols, rows[-1])))
            lines.append(f"sigma={sigma.label} alpha={alpha:g}: A={dp.A:.6g} delta={dp.delta:.6g} "
                         f"D={dp.D:.6g} C={dp.C:.6g} meV, alpha_cri={a_c:.6g}")
    doc = dict(_meta(cfg), params=runs)
    _text_or(cfg, args, "\n".join(lines) + "\n", cols, rows, doc)
    return EXIT_OK


def cmd_dispersion(cfg: RunConfig, args) -> int:
    g = cfg.dispersion
    q = np.linspace(g.q_min, g.q_max, g.points)
    qv = np.zeros((len(q), 3))
    qv[:, 0] = q
    tables, runs = [], []
    for alpha in cfg.alpha:
        rows = []
        for sigma in (Mode.PLUS, Mode.MINUS):
            eps = np.atleast_1d(dispersion(derive_params(cfg.material, sigma, alpha),
                                           cfg.material, qv, lattice=g.lattice))
            rows += [(sigma.label, qi, e.real, e.imag) for qi, e in zip(q, eps)]
        tables.append((alpha, rows))
        runs.append({"alpha": alpha, "rows": [dict(zip(DISPERSION_COLUMNS, r)) for r in rows]})
    _emit_tables(cfg, DISPERSION_COLUMNS, tables, dict(_meta(cfg), runs=runs))
    return EXIT_OK


def _report_dict(rep) -> dict:
    return {
        "regime": rep.regime.value, "alpha": rep.alpha,
        "alpha_cri_plus": rep.alpha_cri_plus, "alpha_cri_minus": rep.alpha_cri_minus,
        "k_cri_plus": rep.k_cri_plus, "k_cri_minus": rep.k_cri_minus,
        "lambda_plus": rep.lambda_plus, "lambda_minus": rep.lambda_minus,
        "beat_period": rep.beat_period,
    }


def cmd_regime(cfg: RunConfig, args) -> int:
    reps = [classify_regime(cfg.material, a) for a in cfg.alpha]
    dicts = [_report_dict(r) for r in reps]
    cols = tuple(dicts[0])
    text = "".join(r.summary() + "\n" for r in reps)
    _text_or(cfg, args, text, cols, [tuple(d.values()) for d in dicts],
             dict(_meta(cfg), regimes=dicts))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    tables, runs = [], []
    for alpha in cfg.alpha:
        b = cfg.sweep.b if cfg.sweep.b is not None else default_exponent(cfg.material, alpha)
        print(f"sweep alpha={alpha:g} N_z={cfg.sweep.n_z_min}..{cfg.sweep.n_z_max} b={b:g} "
              f"workers={cfg.workers}", file=sys.stderr)
        pts = thickness_sweep(cfg.material, alpha, cfg.sweep.bounds, b=b,
                              quad=cfg.quadrature, workers=cfg.workers)
        rows = sweep_rows(pts)
        tables.append((alpha, rows))
        runs.append({"alpha": alpha, "b": b,
                     "regime": classify_regime(cfg.material, alpha).regime.value,
                     "points": [dict(zip(SWEEP_COLUMNS, r)) for r in rows]})
    _emit_tables(cfg, SWEEP_COLUMNS, tables, dict(_meta(cfg), runs=runs))
    return EXIT_OK


def analyze_series(series: SweepSeries) -> List[dict]:
    """Every applicable estimate for one series, as ``quantity/value/uncertainty`` records.

    Estimates whose preconditions fail are skipped with a note on stderr.
    """
    m, alpha = series.material, series.alpha
    out = []

    def add(quantity, value, uncertainty=None, part=None):
        out.append({"alpha": alpha, "quantity": quantity, "part": part,
                    "value": value, "uncertainty": uncertainty})

    def note(what, exc):
        print(f"alpha={alpha:g}: {what} skipped: {exc}", file=sys.stderr)

    for sigma in (Mode.PLUS, Mode.MINUS):
        try:
            add(f"predicted_period_{'plus' if sigma is Mode.PLUS else 'minus'}",
                predicted_period(m, sigma, alpha))
        except NoEP:
            pass
    beat = None
    try:
        beat = predicted_beat_period(m, alpha)
        add("predicted_beat_period", beat)
    except NoBeat:
        pass
    for part in ("real", "imag"):
        if not np.any(series.part(part)):
            continue
        for method in PeriodMethod:
            try:
                est = measure_period(series, part, method)
                add(f"period_{method.value}", est.period, est.uncertainty, part)
            except (InsufficientSpan, ValidationError) as exc:
                note(f"{part} {method.value} period", exc)
        if beat is not None:
            try:
                for k, est in enumerate(spectral_components(series, part, 2), start=1):
                    add(f"spectral_component_{k}", est.period, est.uncertainty, part)
                est = envelope_period(series, part)
                add("beat_period", est.period, est.uncertainty, part)
            except (InsufficientSpan, ValidationError) as exc:
                note(f"{part} beat", exc)
    try:
        asym = estimate_asymptote(series)
        add("asymptote_re", asym.value.real, asym.deviation)
        add("asymptote_im", asym.value.imag, asym.deviation)
    except NotConverged as exc:
        note("asymptote", exc)
    for lo, hi in sign_changes(series):
        add("sign_change", 0.5 * (lo + hi), 0.5 * (hi - lo))
    return out


def cmd_analyze(cfg: RunConfig, args) -> int:
    path = Path(args.sweep_file)
    try:
        text = sys.stdin.read() if args.sweep_file == "-" else path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError("sweep_file", f"cannot read {args.sweep_file}: {exc.strerror}") from None
    records = []
    if text.lstrip().startswith("{"):
        doc, runs = read_sweep_json(text)
        material = _material_from_doc(doc)
        for alpha, b, pts in runs:
            records += analyze_series(SweepSeries(pts, material, alpha, b))
    else:
        # CSV carries no metadata; material and alpha come from the config
        pts = read_sweep_csv(text)
        if len(cfg.alpha) != 1:
            raise ValidationError("alpha", "a CSV sweep needs a single --alpha (or a config with one)")
        records += analyze_series(SweepSeries(pts, cfg.material, cfg.alpha[0]))
    cols = ("alpha", "quantity", "part", "value", "uncertainty")
    if cfg.output.format == "json":
        _emit(to_json(dict(_meta(cfg), results=records)), cfg.output.path)
    else:
        _emit(to_csv(cols, [tuple(r[c] for c in cols) for r in records]), cfg.output.path)
    return EXIT_OK


def _material_from_doc(doc) -> MaterialParams:
    try:
        raw = doc["config"]["material"]
        return MaterialParams(**{k: raw[k] for k in ("J", "K_e", "K_h", "S", "a")})
    except (KeyError, TypeError):
        raise ParseError("sweep JSON lacks config.material", key="config.material") from None


COMMANDS = {
    "params": cmd_params,
    "dispersion": cmd_dispersion,
    "regime": cmd_regime,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
}


def run_command(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit status."""
    try:
        args = build_parser().parse_args(argv)
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg, args)
    except QuadratureFailure as exc:
        print(f"error: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MagnonCasimirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
