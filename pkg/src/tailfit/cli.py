"""Command-line front end.

    tailfit fit        --input counts.csv --layout per-author
    tailfit gof        --input counts.csv --replicates 5000 --seed 1 --threads 4
    tailfit analyze    --input prl.csv --input prd.csv --layout per-author
    tailfit prefattach --input events.csv --years 1999:2008
    tailfit synth      --family ys --rho 3 --n 100000 --seed 7

Structured results are written as JSON, plot data and samples as comma
separated text whose leading ``#`` lines carry the resolved configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import secrets
import sys
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, dataset, gof
from .distributions import Family, ModelSpec, pmf
from .errors import DomainError, TailfitError
from .fitting import fit
from .sampling import SeededRng, sample

SEED_ENV = "TAILFIT_SEED"
FIT_FAMILIES = (Family.POWER_LAW, Family.POWER_LAW_CUTOFF, Family.YULE_SIMON, Family.EXPONENTIAL)
GOF_FAMILIES = (Family.POWER_LAW, Family.POWER_LAW_CUTOFF, Family.YULE_SIMON)
# Rows of the curve table beyond this span above n_min are thinned.
MAX_DENSE_ROWS = 100_000

_PKG_DIR = Path(__file__).resolve().parent


@dataclass
class RunConfig:
    """Everything that determines a run's results.

    Execution-only settings (worker count, progress, output paths) are kept
    out of it so that they cannot change output bytes.
    """

    subcommand: str
    inputs: list = field(default_factory=list)
    layout: str = "value-mult"
    families: list = field(default_factory=list)
    n_min: int | None = None
    replicates: int = gof.DEFAULT_REPLICATES
    seed: int = 0
    seed_source: str = "flag"
    years: list | None = None
    window: int = analysis.DEFAULT_WINDOW
    prominence: float = analysis.DEFAULT_PROMINENCE
    include_inactive: bool = False
    joint_ranges: list | None = None
    params: dict | None = None
    count: int | None = None


class _CommandError(Exception):
    """Collected per-family failures; the run still writes its output."""


def _year_range(text):
    try:
        a, b = text.split(":")
        return [int(a) if a else dataset.YEAR_RANGE[0], int(b)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None


def _int_range(text):
    try:
        a, b = text.split(":")
        return [int(a), int(b)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _family(text):
    try:
        return Family.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", action="append", default=[], metavar="PATH",
                        help="input file ('-' or omitted: standard input)")
    common.add_argument("--layout", choices=["per-author", "value-mult", "events"],
                        default=None, help="input layout (default: value-mult; events for prefattach)")
    common.add_argument("--family", action="append", type=_family, default=[],
                        help="pl | plwc | ys | exp (repeatable)")
    common.add_argument("--nmin", type=_positive_int, default=None,
                        help="support lower bound; smaller counts are discarded")
    common.add_argument("--replicates", type=_positive_int, default=gof.DEFAULT_REPLICATES)
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (fallback: ${SEED_ENV}, else generated and reported)")
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="worker processes for bootstrap replicates")
    common.add_argument("--out", metavar="PATH", default=None, help="output file (default stdout)")
    common.add_argument("--plot-data", metavar="PATH", default=None)
    common.add_argument("--years", type=_year_range, default=None, metavar="A:B")
    common.add_argument("--window", type=_positive_int, default=analysis.DEFAULT_WINDOW)
    common.add_argument("--prominence", type=float, default=analysis.DEFAULT_PROMINENCE)
    common.add_argument("--progress", action="store_true",
                        help="report replicate progress on stderr")

    parser = argparse.ArgumentParser(
        prog="tailfit", description="Heavy-tailed count distributions: fit, test, analyze."
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("fit", parents=[common], help="fit every family and report parameters")
    p_gof = sub.add_parser("gof", parents=[common], help="fits plus bootstrap p-values")
    p_gof.add_argument("--ks-out", metavar="PATH", default=None,
                       help="write replicate KS distances (one column per file)")
    p_an = sub.add_parser("analyze", parents=[common],
                          help="count ceiling, key players, peaks, joint histogram")
    p_an.add_argument("--joint-range", action="append", type=_int_range, default=None,
                      metavar="LO:HI", help="count window for corpus A, then corpus B")
    p_pa = sub.add_parser("prefattach", parents=[common], help="preferential-attachment rates")
    p_pa.add_argument("--include-inactive", action="store_true",
                      help="also count authors who do not publish in the year")
    p_syn = sub.add_parser("synth", parents=[common], help="sample from a distribution")
    for name in ("alpha", "beta", "gamma", "rho", "lambda"):
        p_syn.add_argument(f"--{name}", type=float, default=None, dest=f"param_{name}")
    p_syn.add_argument("--n", type=_positive_int, default=None, dest="count",
                       help="number of draws")
    return parser


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed, "flag"
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env), "env"
        except ValueError:
            raise DomainError(f"${SEED_ENV} is not an integer: {env!r}") from None
    return secrets.randbits(63), "generated"


def _config(args) -> RunConfig:
    seed, source = _resolve_seed(args)
    SeededRng(seed)
    sub = args.subcommand
    layout = args.layout or ("events" if sub == "prefattach" else "value-mult")
    if sub == "fit":
        families = args.family or list(FIT_FAMILIES)
    elif sub == "gof":
        families = args.family or list(GOF_FAMILIES)
    else:
        families = args.family
    families = list(dict.fromkeys(families))
    cfg = RunConfig(
        subcommand=sub,
        inputs=args.input or ["-"],
        layout=layout,
        families=[f.value for f in families],
        n_min=args.nmin,
        replicates=args.replicates,
        seed=seed,
        seed_source=source,
        years=args.years,
        window=args.window,
        prominence=args.prominence,
    )
    if sub == "prefattach":
        cfg.include_inactive = args.include_inactive
    if sub == "analyze":
        cfg.joint_ranges = args.joint_range
    if sub == "synth":
        cfg.params = {
            name: getattr(args, f"param_{name}")
            for name in ("alpha", "beta", "gamma", "rho", "lambda")
            if getattr(args, f"param_{name}") is not None
        }
        cfg.count = args.count
    return cfg


# ---------------------------------------------------------------------------
# helpers


def _clean(obj):
    """Make ``obj`` JSON-safe: NaN/inf become null, numpy scalars plain."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _error_record(exc: BaseException) -> dict:
    module = "cli"
    for frame in traceback.extract_tb(exc.__traceback__):
        path = Path(frame.filename).resolve()
        if path.parent == _PKG_DIR:
            module = path.stem
    return {"module": module, "type": type(exc).__name__, "message": str(exc)}


def _report_error(exc: BaseException):
    rec = _error_record(exc)
    print(f"tailfit: error [{rec['module']}] {rec['type']}: {rec['message']}", file=sys.stderr)
    return rec


_INPUT_CACHE: dict = {}


def _open_source(path):
    # Inputs are read once per run so stdin can feed several loaders.
    if path not in _INPUT_CACHE:
        if path == "-":
            _INPUT_CACHE[path] = sys.stdin.buffer.read()
        else:
            with open(path, "rb") as fh:
                _INPUT_CACHE[path] = fh.read()
    return _INPUT_CACHE[path]


def _config_line(cfg: RunConfig) -> str:
    return "# config: " + json.dumps(_clean(asdict(cfg)), sort_keys=True) + "\n"


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path, payload):
    _write_text(path, json.dumps(_clean(payload), indent=2) + "\n")


def _load_sample(path, cfg: RunConfig) -> dataset.CountSample:
    source = _open_source(path)
    label = "stdin" if path == "-" else str(path)
    if cfg.layout == "events":
        log = dataset.load_events(source, label)
        first, last = cfg.years or (dataset.YEAR_RANGE[0], int(log.years.max()))
        data = dataset.reduce_by_year(log, last, first)
    else:
        data = dataset.load_counts(source, cfg.layout, label)
    if cfg.n_min is not None:
        data = dataset.truncate_min(data, cfg.n_min)
    return data


def _load_author_counts(path, cfg: RunConfig) -> dict:
    source = _open_source(path)
    if cfg.layout == "per-author":
        counts = dataset.load_author_counts(source)
    elif cfg.layout == "events":
        log = dataset.load_events(source)
        first, last = cfg.years or (dataset.YEAR_RANGE[0], int(log.years.max()))
        counts = dataset.author_counts_by_year(log, last, first)
    else:
        raise DomainError("joint analysis needs author ids: use --layout per-author or events")
    if cfg.n_min is not None:
        counts = {a: c for a, c in counts.items() if c >= cfg.n_min}
    return counts


def _sample_summary(data):
    return {
        "label": data.label,
        "N": data.size,
        "n_min_observed": data.n_min_observed,
        "max": data.max_value,
        "distinct": int(data.values.size),
    }


def _fit_record(result):
    return {
        "family": result.spec.family.value,
        "name": result.spec.family.label,
        "params": result.spec.param_dict,
        "n_min": result.spec.n_min,
        "log_likelihood": result.log_likelihood,
        "converged": result.converged,
        "iterations": result.iterations,
        "at_bound": bool(result.diagnostics.get("at_bound", False)),
    }


def _fit_all(data, families, n_min, errors):
    fits, records = {}, []
    for fam in families:
        fam = Family.parse(fam)
        try:
            res = fit(fam, data, n_min)
        except TailfitError as exc:
            errors.append(exc)
            records.append({"family": fam.value, "name": fam.label, "error": _report_error(exc)})
            continue
        fits[fam] = res
        records.append(_fit_record(res))
    return fits, records


def _curve_rows(data):
    lo, hi = data.n_min_observed, data.max_value
    if hi - lo <= MAX_DENSE_ROWS:
        return np.arange(lo, hi + 1)
    grid = np.unique(np.geomspace(lo, hi, 2000).astype(np.int64))
    return np.union1d(grid, data.values)


def _curve_table(cfg, data, n_min):
    errors: list = []
    fits, _ = _fit_all(data, FIT_FAMILIES, n_min, errors)
    n = _curve_rows(data)
    share = dataset.proportion_histogram(data).bins
    columns = [np.array([share.get(int(v), 0.0) for v in n])]
    for fam in FIT_FAMILIES:
        res = fits.get(fam)
        columns.append(pmf(res.spec, n) if res is not None else np.full(n.shape, math.nan))
    bound = analysis.n_max(data.size, fits[Family.POWER_LAW].spec) if Family.POWER_LAW in fits else math.nan
    lines = [_config_line(cfg), f"# n_max: {bound!r}\n", "n,a_J,pmf_pl,pmf_plwc,pmf_ys,pmf_exp\n"]
    for i, v in enumerate(n.tolist()):
        lines.append(",".join([str(v)] + [repr(float(c[i])) for c in columns]) + "\n")
    return "".join(lines)


def _progress_printer(label):
    def report(done, total):
        print(f"tailfit: {label}: {done}/{total} replicates", file=sys.stderr, flush=True)
    return report


# ---------------------------------------------------------------------------
# subcommands


def _cmd_fit(cfg, args):
    if len(cfg.inputs) != 1:
        raise DomainError(f"{cfg.subcommand} takes exactly one --input")
    data = _load_sample(cfg.inputs[0], cfg)
    n_min = cfg.n_min if cfg.n_min is not None else data.n_min_observed
    errors: list = []
    fits, records = _fit_all(data, cfg.families, n_min, errors)
    if cfg.subcommand == "gof":
        for rec in records:
            if "error" in rec:
                continue
            fam = Family.parse(rec["family"])
            progress = _progress_printer(f"gof {fam.value}") if args.progress else None
            try:
                result = gof.gof_test(fam, data, n_min, cfg.replicates, cfg.seed,
                                      workers=args.threads, progress=progress)
            except TailfitError as exc:
                errors.append(exc)
                rec["gof_error"] = _report_error(exc)
                continue
            rec["gof"] = {
                "observed_ks": result.observed_ks,
                "p_value": result.p_value,
                "p_percent": f"{100 * result.p_value:.2f}",
                "p_text": gof.format_p_value(result.p_value, result.replicates),
                "rejected": result.rejected,
                "replicates": result.replicates,
                "seed": result.seed,
                "failed_replicates": list(result.failed),
            }
            if args.ks_out:
                _write_ks(args.ks_out, fam, len(records) > 1, cfg, result)
    payload = {"config": asdict(cfg), "sample": _sample_summary(data), "fits": records}
    _write_json(args.out, payload)
    if args.plot_data:
        _write_text(args.plot_data, _curve_table(cfg, data, n_min))
    if errors:
        raise _CommandError()


def _write_ks(path, fam, several, cfg, result):
    path = Path(path)
    if several:
        path = path.with_name(f"{path.stem}_{fam.value}{path.suffix}")
    body = "".join(f"{v!r}\n" for v in result.replicate_ks.tolist())
    _write_text(path, _config_line(cfg) + f"# family: {fam.value}\n" + body)


def _cmd_analyze(cfg, args):
    if len(cfg.inputs) not in (1, 2):
        raise DomainError("analyze takes one or two --input corpora")
    corpora = []
    for path in cfg.inputs:
        data = _load_sample(path, cfg)
        n_min = cfg.n_min if cfg.n_min is not None else data.n_min_observed
        pl = fit(Family.POWER_LAW, data, n_min)
        report = analysis.key_players(data, pl)
        peaks = analysis.detect_peaks(dataset.count_histogram(data), cfg.window, cfg.prominence)
        corpora.append({
            "sample": _sample_summary(data),
            "power_law": _fit_record(pl),
            "n_max": report.n_max,
            "key_players": [{"count": v, "authors": m} for v, m in report.exceeders],
            "peaks": [{"value": v, "height": h} for v, h in peaks],
        })
    payload = {"config": asdict(cfg), "corpora": corpora}
    joint = None
    if len(cfg.inputs) == 2:
        counts_a = _load_author_counts(cfg.inputs[0], cfg)
        counts_b = _load_author_counts(cfg.inputs[1], cfg)
        ranges = cfg.joint_ranges or []
        joint = analysis.joint_histogram(
            counts_a, counts_b,
            ranges[0] if len(ranges) > 0 else None,
            ranges[1] if len(ranges) > 1 else None,
        )
        payload["joint"] = {
            "shared_authors": joint.total,
            "top_cells": [{"count_a": a, "count_b": b, "authors": n} for (a, b), n in joint.top_cells(2)],
            "cells": len(joint.bins),
        }
    _write_json(args.out, payload)
    if args.plot_data:
        if joint is not None:
            rows = "".join(f"{a},{b},{n}\n" for a, b, n in joint.rows())
            _write_text(args.plot_data, _config_line(cfg) + "count_A,count_B,n_authors\n" + rows)
        else:
            data = _load_sample(cfg.inputs[0], cfg)
            n_min = cfg.n_min if cfg.n_min is not None else data.n_min_observed
            _write_text(args.plot_data, _curve_table(cfg, data, n_min))


def _cmd_prefattach(cfg, args):
    if len(cfg.inputs) != 1:
        raise DomainError("prefattach takes exactly one --input")
    if cfg.years is None:
        raise DomainError("prefattach needs --years A:B")
    if cfg.layout != "events":
        raise DomainError("prefattach reads the events layout")
    source = _open_source(cfg.inputs[0])
    log = dataset.load_events(source, cfg.inputs[0])
    result = analysis.pref_attach_rates(log, tuple(cfg.years), cfg.include_inactive)
    payload = {
        "config": asdict(cfg),
        "events": len(log),
        "points": [
            {"k": p.k, "t": p.t, "N_k": p.N_k, "m_k": p.m_k, "rate": p.rate} for p in result.points
        ],
        "pearson_r": result.pearson_r if result.r_defined else None,
        "pearson_defined": result.r_defined,
        "note": result.note,
    }
    _write_json(args.out, payload)
    if args.plot_data:
        rows = "".join(f"{p.k},{p.t},{p.N_k},{p.m_k},{p.rate!r}\n" for p in result.points)
        _write_text(args.plot_data, _config_line(cfg) + "k,t,N_k,m_k,rate\n" + rows)


def _cmd_synth(cfg, args):
    if len(cfg.families) != 1:
        raise DomainError("synth needs exactly one --family")
    fam = Family.parse(cfg.families[0])
    missing = [p for p in fam.param_names if p not in cfg.params]
    if missing:
        raise DomainError(f"{fam.label} needs --{' --'.join(missing)}")
    if cfg.count is None:
        raise DomainError("synth needs --n")
    spec = ModelSpec(fam, tuple(cfg.params[p] for p in fam.param_names), cfg.n_min or 1)
    data = sample(spec, SeededRng(cfg.seed, 0), cfg.count)
    _write_text(args.out, _config_line(cfg) + dataset.format_counts(data))


_COMMANDS = {
    "fit": _cmd_fit,
    "gof": _cmd_fit,
    "analyze": _cmd_analyze,
    "prefattach": _cmd_prefattach,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _INPUT_CACHE.clear()
    try:
        cfg = _config(args)
        _COMMANDS[cfg.subcommand](cfg, args)
    except _CommandError:
        return 1
    except (TailfitError, OSError) as exc:
        _report_error(exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
