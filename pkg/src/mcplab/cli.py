"""Command-line interface.

Subcommands: generate, measure, solve, verify-lemmas, experiment, bounds.
Exit codes: 0 success, 1 usage/config error, 2 infeasible or failed checks,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .bounds import BoundInputs, gamma_constants, theorem1_rhs, theorem2_bound
from .codebook import (
    Codebook,
    ComplexityBudget,
    Family,
    ProgramEntry,
    decode,
    description_length,
    entry_id,
    enumerate_entries,
)
from .concentration import EventParams, event_bounds
from .config import ConfigError, ExperimentConfig
from .experiments import run_experiment, run_lemmas
from .quantize import Resolution
from .report import emit_lemma_report, emit_report
from .sensing import MeasurementRecord, draw_ensemble, measure_noisy
from .solver import (
    FeasibilityTolerance,
    NoFeasibleCandidateError,
    solve_noiseless,
    solve_noisy,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _families(names: str) -> tuple[Family, ...]:
    try:
        return tuple(Family[x.strip()] for x in names.split(",") if x.strip())
    except KeyError as exc:
        raise _UsageError(f"unknown family {exc.args[0]!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcplab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mcplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="list codebook entries in canonical order")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--families", type=str, default="CONSTANT,K_SPARSE")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--limit", type=int, default=None, help="stop after this many entries")
    p.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")

    p = sub.add_parser("measure", help="produce a measurement record file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--families", type=str, default="CONSTANT,K_SPARSE")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--truth-seed", type=int, default=0)
    p.add_argument("--matrix-seed", type=int, default=1)
    p.add_argument("--noise-seed", type=int, default=2)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("solve", help="run one recovery from a measurement file")
    p.add_argument("--measurement", type=Path, required=True)
    p.add_argument("--mode", choices=["noiseless", "noisy"], default="noisy")
    p.add_argument("--budget", type=int, default=None, help="override stored budget")
    p.add_argument("--delta", type=float, default=None, help="noiseless feasibility slack")

    p = sub.add_parser("verify-lemmas", help="run the concentration suite")
    p.add_argument("--trials", type=int, default=100_000, help="baseline trial count")
    p.add_argument("--seed", type=int, default=20260809)
    p.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")
    p.add_argument("--outdir", type=Path, default=None, help="directory for CSV + figures")
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("experiment", help="run sweeps from a JSON config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--outdir", type=Path, required=True)
    p.add_argument("--format", choices=["csv", "json", "both"], default="csv")
    p.add_argument("--seed", type=int, default=None, help="override base_seed")
    p.add_argument("--trials", type=int, default=None, help="override trials")
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("bounds", help="print the closed-form bound values")
    p.add_argument("--kappa-bits", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--t", type=float, default=1.0)

    return parser


def _cmd_generate(args) -> int:
    import csv as _csv

    budget = ComplexityBudget(args.budget)
    rows = []
    for i, entry in enumerate(
        enumerate_entries(budget, args.n, Resolution(args.m), _families(args.families))
    ):
        if args.limit is not None and i >= args.limit:
            break
        sig = decode(entry)
        preview = " ".join(repr(float(v)) for v in sig.values[: min(8, args.n)])
        rows.append(
            [i, entry.generator_id.name, description_length(entry), entry_id(entry), preview]
        )
    header = ["index", "generator", "description_bits", "entry_id", "values_preview"]
    if args.out is None:
        writer = _csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    else:
        with args.out.open("w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    return EXIT_OK


def _cmd_measure(args) -> int:
    book = Codebook(args.n, Resolution(args.m), _families(args.families))
    budget = ComplexityBudget(args.budget)
    truth = book.sample(budget, args.truth_seed)
    ensemble = draw_ensemble(args.d, args.n, args.matrix_seed)
    record = measure_noisy(ensemble, decode(truth).values, args.sigma, args.noise_seed)
    payload = {
        "n": args.n,
        "m": args.m,
        "d": args.d,
        "families": [f.name for f in book.families],
        "budget_bits": args.budget,
        "matrix_seed": args.matrix_seed,
        "sigma": record.sigma,
        "noise_seed": record.noise_seed,
        "truth": {
            "generator": truth.generator_id.name,
            "payload_bits": list(truth.payload),
            "bits": description_length(truth),
            "id": entry_id(truth),
        },
        "y": [repr(float(v)) for v in record.y],
    }
    args.out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {args.out} (truth {entry_id(truth)}, d={args.d})")
    return EXIT_OK


def _cmd_solve(args) -> int:
    import numpy as np

    spec = json.loads(args.measurement.read_text(encoding="utf-8"))
    book = Codebook(
        spec["n"], Resolution(spec["m"]), tuple(Family[f] for f in spec["families"])
    )
    budget = ComplexityBudget(args.budget if args.budget is not None else spec["budget_bits"])
    ensemble = draw_ensemble(spec["d"], spec["n"], spec["matrix_seed"])
    y = np.array([float(v) for v in spec["y"]])
    record = MeasurementRecord(y=y, sigma=spec["sigma"], noise_seed=spec["noise_seed"])
    try:
        if args.mode == "noiseless":
            tol = None if args.delta is None else FeasibilityTolerance(args.delta)
            result = solve_noiseless(ensemble, y, book, budget, tol)
        else:
            result = solve_noisy(ensemble, record, book, budget)
    except NoFeasibleCandidateError as exc:
        print(f"NO_FEASIBLE_CANDIDATE: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    out = {
        "entry": entry_id(result.entry),
        "generator": result.entry.generator_id.name,
        "complexity_bits": result.complexity_bits,
        "residual": result.residual,
        "candidates_scored": result.candidates_scored,
        "x_hat": [float(v) for v in result.x_hat.values],
        "truth": spec.get("truth", {}).get("id"),
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _cmd_verify_lemmas(args) -> int:
    cfg = ExperimentConfig.from_dict(
        {"experiment_id": "LEMMAS", "trials": args.trials, "base_seed": args.seed}
    )
    reports = run_lemmas(cfg)
    if args.outdir is not None:
        args.outdir.mkdir(parents=True, exist_ok=True)
        out = args.out if args.out is not None else args.outdir / "lemma_checks.csv"
        emit_lemma_report(reports, out)
        print(f"wrote {out}")
        if not args.no_figures:
            from .figures import render_lemma_figures

            for path in render_lemma_figures(reports, args.outdir):
                print(f"wrote {path}")
    elif args.out is not None:
        emit_lemma_report(reports, args.out)
        print(f"wrote {args.out}")
    else:
        import csv as _csv

        writer = _csv.writer(sys.stdout)
        writer.writerow(["event_name", "trials", "hits", "empirical_rate", "analytic_bound", "pass"])
        for rep in reports:
            writer.writerow(
                [rep.event_name, rep.trials, rep.hits, repr(rep.empirical_rate),
                 repr(rep.analytic_bound), rep.passed]
            )
    failed = [r.event_name for r in reports if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if overrides:
        raw = cfg.to_dict()
        raw.pop("m_rule")
        raw = {k: v for k, v in raw.items() if v is not None}
        raw.update(overrides)
        cfg = ExperimentConfig.from_dict(raw)
    args.outdir.mkdir(parents=True, exist_ok=True)
    result = run_experiment(cfg)
    if cfg.experiment_id == "LEMMAS":
        out = args.outdir / "lemma_checks.csv"
        emit_lemma_report(result, out)
        print(f"wrote {out}")
        if not args.no_figures:
            from .figures import render_lemma_figures

            for path in render_lemma_figures(result, args.outdir):
                print(f"wrote {path}")
        return EXIT_INFEASIBLE if any(not r.passed for r in result) else EXIT_OK
    if args.format in ("csv", "both"):
        print(f"wrote {emit_report(result.records, 'csv', args.outdir / 'records.csv', cfg)}")
    if args.format in ("json", "both"):
        print(f"wrote {emit_report(result.records, 'json', args.outdir / 'records.json', cfg)}")
    summary_path = args.outdir / "summary.json"
    summary_path.write_text(
        json.dumps(
            {"config": cfg.to_dict(), "code_version": __version__, "summary": result.summary},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {summary_path}")
    if not args.no_figures:
        from .figures import render_experiment_figures

        for path in render_experiment_figures(result, args.outdir):
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    inputs = BoundInputs(
        kappa_bits=args.kappa_bits,
        m=args.m,
        n=args.n,
        d=args.d,
        tau=args.tau,
        t=args.t,
        sigma=args.sigma,
        r=args.r,
    )
    t1 = theorem1_rhs(inputs)
    params = EventParams.for_ratio(
        r=args.r, sigma=args.sigma, d=args.d, kappa_bits=args.kappa_bits, tau=args.tau
    )
    gammas = gamma_constants(params.t2, params.t3, params.t4, params.t5, params.t6)
    out = {
        "theorem1": {"threshold": t1.threshold, "probability_bound": t1.probability_bound},
        "theorem2_bound": theorem2_bound(args.kappa_bits, args.sigma, args.d, args.r),
        "gamma_constants": gammas._asdict(),
        "event_params": {
            k: getattr(params, k) for k in ("t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8")
        },
        "event_bounds": event_bounds(params, args.d, args.n, args.kappa_bits, args.sigma),
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "measure": _cmd_measure,
    "solve": _cmd_solve,
    "verify-lemmas": _cmd_verify_lemmas,
    "experiment": _cmd_experiment,
    "bounds": _cmd_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
