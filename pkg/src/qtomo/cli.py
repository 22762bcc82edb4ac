"""Command-line entry points.

Exit codes: 0 when every verdict holds, 1 when a verdict fails, 2 for usage
or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__
from .experiments import (STRATEGIES, ConfigError, ExperimentConfig, bound_report, make_strategy,
                          parse_override, run, write_csv, write_csv_rows)
from .hard_instance import HardInstanceParams, build_instance, opnorm_concentration_sweep
from .measurement import InvalidPovmError, load_povm
from .mic_info import lemma62_certify, mi_experiment, spectral_quantity, weight_bound
from .pauli import enumerate_by_min_weight
from .state import DensityMatrix, InvalidStateError
from .tomography import InsufficientCopiesError, run_tomography

EXIT_OK, EXIT_VERDICT, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, default=lambda o: o.item() if hasattr(o, "item") else str(o))
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _guard(fn, argv):
    try:
        return fn(argv)
    except (ConfigError, InvalidStateError, InvalidPovmError, InsufficientCopiesError,
            FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


# qtomo ---------------------------------------------------------------------

def _qtomo(argv):
    parser = _Parser(prog="qtomo", description="Config-driven tomography experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "hardcase", "certify", "mi", "bound"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--output-dir")
        p.add_argument("--threads", type=int)
        p.add_argument("--plot", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value, e.g. grid.trials=500")
    sub.add_parser("version")
    args = parser.parse_args(argv)
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    overrides = dict(parse_override(s) for s in args.set)
    for key in ("seed", "output_dir", "threads", "plot"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    default_kind = None if args.command == "run" else args.command
    cfg = ExperimentConfig.load(args.config, overrides, default_kind=default_kind)
    if default_kind and cfg.kind != default_kind:
        raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}")
    result = run(cfg)
    _emit({"verdict": result.verdict, "config_hash": result.manifest.config_hash,
           "outputs": result.manifest.outputs})
    return EXIT_OK if result.verdict else EXIT_VERDICT


def qtomo_main(argv=None):
    return _guard(_qtomo, argv)


# tomo ----------------------------------------------------------------------

def _tomo(argv):
    parser = _Parser(prog="tomo", description="Pauli-basis tomography of a simulated state.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run")
    p.add_argument("--state", required=True, help="state JSON with n_qubits, re, im")
    p.add_argument("--copies", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--project", action="store_true")
    p.add_argument("--out")
    args = parser.parse_args(argv)
    rho = DensityMatrix.from_json(Path(args.state).read_text())
    result = run_tomography(rho, args.copies, args.seed, project=args.project)
    payload = result.to_dict(truth=rho)
    payload["seed"] = args.seed
    _emit(payload, args.out)
    return EXIT_OK


def tomo_main(argv=None):
    return _guard(_tomo, argv)


# hardcase ------------------------------------------------------------------

def _hardcase(argv):
    parser = _Parser(prog="hardcase", description="Hard-instance generation and sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("gen", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--n-qubits", type=int, required=True)
        p.add_argument("--min-weight", type=int)
        p.add_argument("--eps", type=float, default=0.1)
        p.add_argument("--c", type=float, default=1 / 200)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--out")
    sub.choices["sweep"].add_argument("--trials", type=int, required=True)
    args = parser.parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = HardInstanceParams(args.n_qubits, args.min_weight, c=args.c, eps=args.eps)
    if args.command == "gen":
        h = build_instance(params, args.seed)
        state = json.loads(h.state.to_json())
        _emit({"n_qubits": params.n_qubits, "min_weight": params.min_weight, "ell": params.ell,
               "c": params.c, "eps": params.eps, "seed": args.seed,
               "z": h.z.tolist(), "observables": [p.label for p in params.observables],
               "clip": h.clip, "w_opnorm": h.w_opnorm,
               "normalized_C": h.normalized_constant,
               "trace_dist": h.trace_distance_to_mm, "state": state}, args.out)
        return EXIT_OK
    stats = opnorm_concentration_sweep(params, args.trials, args.seed)
    rows = [{"seed": (args.seed, r["trial"]), **r} for r in stats.rows()]
    if args.out:
        write_csv(Path(args.out), rows)
    else:
        write_csv_rows(sys.stdout, rows)
    print(json.dumps(stats.summary()), file=sys.stderr)
    return EXIT_OK if stats.min_state_eigs.min() >= -1e-10 else EXIT_VERDICT


def hardcase_main(argv=None):
    return _guard(_hardcase, argv)


# mic -----------------------------------------------------------------------

def _mic(argv):
    parser = _Parser(prog="mic", description="Measurement information channel quantities.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("eval")
    p.add_argument("--povm", required=True)
    p.add_argument("--min-weight", type=int, required=True)
    p = sub.add_parser("certify")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--n-qubits", type=int, required=True)
    p.add_argument("--min-weight", type=int, action="append",
                   help="repeatable; default ceil(N/2)..N")
    p.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if args.command == "eval":
        m = load_povm(args.povm)
        n_qubits = m.n_qubits
        if not 0 <= args.min_weight <= n_qubits:
            raise ConfigError(f"min-weight must lie in [0, {n_qubits}]")
        observables = [q for q in enumerate_by_min_weight(n_qubits, args.min_weight)
                       if q.weight > 0]
        value = spectral_quantity(m, observables)
        bound = weight_bound(n_qubits, max(args.min_weight, 1))
        verdict = value <= bound + 1e-9
        _emit({"n_qubits": n_qubits, "min_weight": args.min_weight,
               "n_observables": len(observables), "spectral_quantity": value,
               "weight_bound": bound, "verdict": verdict})
        return EXIT_OK if verdict else EXIT_VERDICT
    weights = args.min_weight or list(range((args.n_qubits + 1) // 2, args.n_qubits + 1))
    reports = [lemma62_certify(args.trials, args.n_qubits, w, args.seed) for w in weights]
    verdict = all(r.verdict for r in reports)
    _emit({"reports": [r.to_dict() for r in reports], "verdict": verdict})
    return EXIT_OK if verdict else EXIT_VERDICT


def mic_main(argv=None):
    return _guard(_mic, argv)


# bound ---------------------------------------------------------------------

def _bound(argv):
    parser = _Parser(prog="bound", description="Copy-count lower-bound chain.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("calc")
    p.add_argument("--n-qubits", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, default=1 / 200)
    args = parser.parse_args(argv)
    report = bound_report(args.n_qubits, args.eps, args.c)
    _emit(report)
    return EXIT_OK if report["verdict"] else EXIT_VERDICT


def bound_main(argv=None):
    return _guard(_bound, argv)


# mi ------------------------------------------------------------------------

def _mi(argv):
    parser = _Parser(prog="mi", description="Mutual information against the MIC bound.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("exact")
    p.add_argument("--config", required=True,
                   help="JSON with n_qubits, copies, strategy and optional "
                        "min_weight, c, eps, seed, budget")
    p.add_argument("--out")
    args = parser.parse_args(argv)
    cfg = json.loads(Path(args.config).read_text())
    n_qubits = int(cfg.get("n_qubits", 1))
    seed = int(cfg.get("seed", 0))
    names = cfg.get("strategies", [cfg.get("strategy", "z")])
    names = names if isinstance(names, list) else [names]
    for name in names:
        if name not in STRATEGIES:
            raise ConfigError(f"unknown strategy {name!r}; choose from {STRATEGIES}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = HardInstanceParams(n_qubits, cfg.get("min_weight"), c=float(cfg.get("c", 1.0)),
                                    eps=float(cfg.get("eps", 0.1)))
    copies = cfg.get("copies", 4)
    copies = copies if isinstance(copies, list) else [copies]
    results = []
    for name in names:
        for n in copies:
            r = mi_experiment(params, make_strategy(name, n_qubits, seed), int(n), mode="exact",
                              budget=cfg.get("budget"))
            results.append({"strategy": name, "seed": seed, **r.to_dict()})
    verdict = all(r["report"]["verdict"] for r in results)
    _emit({"results": results, "verdict": verdict}, args.out)
    return EXIT_OK if verdict else EXIT_VERDICT


def mi_main(argv=None):
    return _guard(_mi, argv)


def main():  # pragma: no cover
    sys.exit(qtomo_main())
