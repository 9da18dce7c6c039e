"""Command-line front end.

Verbs:

* ``transfer``   -- run just the transfer stage of a scenario
* ``simulate``   -- full pipeline: transfer, optics, noise, similarity
* ``retrieve``   -- phase retrieval stage of a scenario
* ``suite``      -- run every scenario in a directory and summarize
* ``emit-plots`` -- turn a report.json into plot-ready CSV files

Exit codes: 0 success, 2 scenario parse error, 3 physics invariant
violation, 4 I/O error, 5 partial suite failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .gridio import atomic_write_text
from .lattice import LatticeError
from .scenario import (
    RunReport,
    ScenarioError,
    emit_plot_data,
    load_scenario,
    run_scenario,
    run_suite,
    suite_table,
)

EXIT_PARSE = 2
EXIT_PHYSICS = 3
EXIT_IO = 4
EXIT_PARTIAL = 5

DEFAULT_OUT_ENV = "BIPHOTON_TRANSFER_OUT"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="biphoton-transfer",
        description="Nonlocal unitary-transfer simulator",
    )
    p.add_argument("--out", default=None,
                   help="output directory (default: scenario setting or "
                        f"${DEFAULT_OUT_ENV})")
    p.add_argument("--seed-override", type=int, default=None,
                   help="replace every scenario-declared seed")
    p.add_argument("--tolerance", type=float, default=1e-9,
                   help="unitarity/physics check tolerance")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb, hlp in (
        ("transfer", "run the transfer stage of a scenario"),
        ("simulate", "run the full pipeline of a scenario"),
        ("retrieve", "run the phase-retrieval stage of a scenario"),
    ):
        sp = sub.add_parser(verb, help=hlp)
        sp.add_argument("scenario")
    sp = sub.add_parser("suite", help="run a directory of scenarios")
    sp.add_argument("directory")
    sp.add_argument("--no-gs", action="store_true",
                    help="skip the retrieval stage for every member")
    sp = sub.add_parser("emit-plots", help="emit plot CSVs from a report.json")
    sp.add_argument("report")
    return p


def _apply_seed_override(sc, seed):
    if seed is None:
        return sc
    return dataclasses.replace(
        sc,
        noise_seed=seed,
        unitary_seed=None if sc.unitary_seed is None else seed,
        gs=dataclasses.replace(sc.gs, seed=seed),
    )


def _out_dir(args, sc=None):
    if args.out:
        return args.out
    env = os.environ.get(DEFAULT_OUT_ENV)
    if env:
        return env if sc is None else os.path.join(env, sc.name)
    return None  # fall back to the scenario's own setting


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.verb in ("transfer", "simulate", "retrieve"):
            sc = _apply_seed_override(load_scenario(args.scenario),
                                      args.seed_override)
            report = run_scenario(
                sc,
                out_dir=_out_dir(args, sc),
                run_gs=args.verb in ("simulate", "retrieve"),
                run_optics=args.verb == "simulate",
            )
            if report.transfer_fidelity < 1.0 - max(args.tolerance, 1e-10):
                print(f"transfer fidelity {report.transfer_fidelity!r} below "
                      f"tolerance", file=sys.stderr)
                return EXIT_PHYSICS
            _print_report(report, args.verb)
            return 0
        if args.verb == "suite":
            reports, failures = run_suite(args.directory,
                                          out_dir=_out_dir(args),
                                          run_gs=not args.no_gs)
            table = suite_table(reports, failures)
            print(table, end="")
            out = _out_dir(args)
            if out:
                atomic_write_text(os.path.join(out, "summary.csv"), table)
            return EXIT_PARTIAL if failures else 0
        if args.verb == "emit-plots":
            with open(args.report) as fh:
                report = RunReport(**json.load(fh))
            emit_plot_data(report, os.path.dirname(os.path.abspath(args.report)))
            return 0
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except LatticeError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TypeError, json.JSONDecodeError) as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return 0


def _print_report(report, verb):
    print(f"scenario          : {report.name}")
    print(f"transfer fidelity : {report.transfer_fidelity:.12f}")
    print(f"success prob      : {report.success_probability:.6g}")
    if report.route_total_variation is not None:
        print(f"route TV          : {report.route_total_variation:.3e}")
    if verb == "simulate":
        if report.similarity_noiseless is not None:
            print(f"similarity (clean): {report.similarity_noiseless:.6f}")
        if report.similarity_noisy is not None:
            print(f"similarity (noisy): {report.similarity_noisy:.6f}")
    if verb in ("simulate", "retrieve") and report.gs_rms_error is not None:
        print(f"GS rms error      : {report.gs_rms_error:.4f} rad "
              f"(best run {report.gs_best_run})")


if __name__ == "__main__":
    sys.exit(main())
