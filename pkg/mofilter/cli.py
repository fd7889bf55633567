from __future__ import annotations
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .archive import RunPaths, write_run
from .config import DEFAULT_OUTPUT_DIR, Config, RunConfig
from .driver import CONVERGED, CRIT_LOOP_STOP, MAX_ITER, RESTORATION_FAILED, RunResult, solve, weighted_sum_baseline
from .errors import ConfigError, MofilterError
from .probes import SUITES, run_probe
from .problem import get_problem, mw3, two_parabolas, weighted_sum_problem
from .surrogates import MODEL_KINDS, RBF_CUBIC

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MAX_ITER = 2
EXIT_RESTORATION = 3
EXIT_PROBE_FAILED = 4

EX1_STARTS = {"a": [-2.0, 0.5], "b": [-2.0, 0.0]}
EX2_START = [0.3, 0.5, 0.4]
EX2_OVERRIDES = {"tol_rel_x": 1e-6, "tol_rel_f": 1e-6, "max_iter": 500}
EX2_RELAXED = {"c_delta": 0.99, "c_mu": 1000.0}
EX2_WEIGHTS = [0.5, 0.5]


def setup_logging(verbosity: int, logfile: Optional[Path] = None):
    level = logging.INFO if verbosity == 0 else logging.DEBUG
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if logfile is not None:
        logfile.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(logfile, mode="a", encoding="utf-8"))
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s: %(message)s",
        handlers=handlers,
    )


def exit_code(status: str) -> int:
    if status in (CONVERGED, CRIT_LOOP_STOP):
        return EXIT_OK
    if status == MAX_ITER:
        return EXIT_MAX_ITER
    if status == RESTORATION_FAILED:
        return EXIT_RESTORATION
    return EXIT_USAGE


def output_root(cli_value: Optional[str], default: str = DEFAULT_OUTPUT_DIR) -> Path:
    return Path(os.getenv("MOFILTER_OUTPUT_DIR") or cli_value or default)


def print_summary(label: str, result: RunResult):
    rec = result.record_final
    print(f"[{label}] status={result.status} iterations={result.iterations} "
          f"restorations={result.restorations} evals={result.num_evals}")
    print(f"[{label}] x={np.array2string(rec.x, precision=8)} f={np.array2string(rec.f, precision=8)}")
    print(f"[{label}] theta={rec.theta:.3e} chi={result.chi_final:.3e} "
          f"kkt_stationarity={result.kkt_stationarity:.3e} kkt_complementarity={result.kkt_complementarity:.3e}")


# ------------------------------- #
# Kommandos
# ------------------------------- #
def cmd_run(config_path: str, verbosity: int = 0, parquet: bool = False) -> int:
    try:
        rc = RunConfig.from_json(config_path)
        cfg = rc.solver_config()
        problem = get_problem(rc.problem_name)
        if rc.weights is not None:
            problem = weighted_sum_problem(problem, rc.weights)
        if len(rc.x0) != problem.n:
            raise ConfigError(f"x0 has length {len(rc.x0)}, problem '{problem.name}' expects n={problem.n}")
    except (ConfigError, KeyError, ValueError, OSError) as e:
        setup_logging(verbosity)
        logging.error(f"invalid run config {config_path}: {e}")
        return EXIT_USAGE

    out = Path(rc.output_dir)
    setup_logging(verbosity, RunPaths.from_root(out).logfile)
    logging.info(f"run {config_path}: problem={problem.name} model={cfg.model_kind} output={out}")
    try:
        result = solve(problem, rc.x0, cfg)
        write_run(result, out, parquet=parquet)
    except (MofilterError, OSError) as e:
        logging.error(f"run failed: {e}")
        return EXIT_USAGE
    print_summary(problem.name, result)
    return exit_code(result.status)


def cmd_ex1(model_kind: str, variant: str, output_dir: Optional[str] = None, verbosity: int = 0) -> int:
    if model_kind not in MODEL_KINDS or variant not in EX1_STARTS:
        setup_logging(verbosity)
        logging.error(f"ex1 needs --model in {MODEL_KINDS} and --variant in {sorted(EX1_STARTS)}")
        return EXIT_USAGE
    out = output_root(output_dir) / f"ex1-{model_kind}-{variant}"
    setup_logging(verbosity, RunPaths.from_root(out).logfile)
    cfg = Config(model_kind=model_kind).validate()
    try:
        result = solve(two_parabolas(), EX1_STARTS[variant], cfg)
        write_run(result, out)
    except (MofilterError, OSError) as e:
        logging.error(f"ex1 failed: {e}")
        return EXIT_USAGE
    print_summary(f"ex1 {model_kind} {variant}", result)
    return exit_code(result.status)


def cmd_ex2(relaxed: bool = False, output_dir: Optional[str] = None, verbosity: int = 0) -> int:
    out = output_root(output_dir) / ("ex2-relaxed" if relaxed else "ex2")
    setup_logging(verbosity, RunPaths.from_root(out).logfile)
    overrides = dict(EX2_OVERRIDES, model_kind=RBF_CUBIC)
    notes = [f"x0={EX2_START} is a fixed infeasible start; the source experiment gives no coordinates"]
    if relaxed:
        overrides.update(EX2_RELAXED)
        notes.append(f"relaxed compatibility constants {EX2_RELAXED} are a fixed choice, not source values")
    cfg = Config().replace(**overrides)
    try:
        result = solve(mw3(), EX2_START, cfg, notes=notes)
        write_run(result, out / "filter")
        baseline = weighted_sum_baseline(mw3(), EX2_WEIGHTS, EX2_START, cfg,
                                         notes=notes + [f"weighted-sum baseline with w={EX2_WEIGHTS}"])
        write_run(baseline, out / "weighted")
    except (MofilterError, OSError) as e:
        logging.error(f"ex2 failed: {e}")
        return EXIT_USAGE
    print_summary("ex2 filter", result)
    print_summary("ex2 weighted-sum", baseline)
    return max(exit_code(result.status), exit_code(baseline.status))


def cmd_probe(suite: str, seed: int = 0, verbosity: int = 0) -> int:
    setup_logging(verbosity)
    try:
        results = run_probe(suite, seed=seed)
    except KeyError as e:
        logging.error(str(e))
        return EXIT_USAGE
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROBE_FAILED


# ------------------------------- #
# Einstieg
# ------------------------------- #
def parse_args(argv: Optional[List[str]] = None):
    p = argparse.ArgumentParser(
        prog="mofilter",
        description="Ableitungsfreier Trust-Region-Filter-Löser für restringierte Mehrzielprobleme",
    )
    p.add_argument("-v", "--verbose", action="count", default=0, help="Mehr Logs (DEBUG).")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="Lauf aus einer JSON-Konfiguration.")
    r.add_argument("config", help="Pfad zur Laufkonfiguration (JSON).")
    r.add_argument("--parquet", action="store_true", help="Zusätzlich trace.parquet schreiben (pyarrow nötig).")

    e1 = sub.add_parser("ex1", help="Zwei-Parabeln-Experiment.")
    e1.add_argument("--model", choices=MODEL_KINDS, default=RBF_CUBIC, help="Modelltyp.")
    e1.add_argument("--variant", choices=sorted(EX1_STARTS), default="a", help="Startpunkt a=[-2,0.5], b=[-2,0].")
    e1.add_argument("--output-dir", default=None, help="Ausgabeverzeichnis (sonst MOFILTER_OUTPUT_DIR oder runs/).")

    e2 = sub.add_parser("ex2", help="MW3-Experiment plus gewichtete Summe.")
    e2.add_argument("--relaxed", action="store_true", help="Gelockerte Kompatibilitätskonstanten.")
    e2.add_argument("--output-dir", default=None, help="Ausgabeverzeichnis (sonst MOFILTER_OUTPUT_DIR oder runs/).")

    pr = sub.add_parser("probe", help="Eigenschaftstests.")
    pr.add_argument("suite", choices=sorted(SUITES), help="Welche Suite?")
    pr.add_argument("--seed", type=int, default=0, help="Seed der Zufallsinstanzen.")
    return p.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.verbose, parquet=args.parquet)
    if args.command == "ex1":
        return cmd_ex1(args.model, args.variant, args.output_dir, args.verbose)
    if args.command == "ex2":
        return cmd_ex2(args.relaxed, args.output_dir, args.verbose)
    return cmd_probe(args.suite, args.seed, args.verbose)


if __name__ == "__main__":
    sys.exit(main())
