"""Command-line front end for batch relation searches.

Exit codes: 0 relation found, 2 precision exhausted, 3 iteration limit,
1 usage or internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import gmpy2

from .multilevel import LevelConfig, run_multilevel
from .parallel import default_worker_count
from .precision import EpsilonPolicy, format_sci, workprec
from .problems import ProblemSpec, build_vector, load_input_file, parse_problem
from .pslq import Status

__all__ = [
    "RunReport",
    "UsageError",
    "emit_report",
    "load_input_file",
    "main",
    "parse_args",
    "run_search",
]

_EXIT_CODES = {
    Status.FOUND: 0,
    Status.PRECISION_EXHAUSTED: 2,
    Status.ITERATION_LIMIT: 3,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    problem: ProblemSpec
    policy: EpsilonPolicy
    level_cfg: LevelConfig
    algo: str
    gamma: str | None
    beta: float
    max_iters: int
    workers: int
    json_path: str | None
    log_path: str | None


@dataclass
class RunReport:
    """Machine-readable summary of one search."""

    problem: str
    algo: str
    levels: int
    status: str
    coefficients: list | None
    norm_bound: str
    confidence: str | None
    iterations: int
    digits_used: int
    level_stats: dict = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    @property
    def exit_code(self) -> int:
        return _EXIT_CODES.get(Status(self.status), 1)

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "algo": self.algo,
            "levels": self.levels,
            "status": self.status,
            "coefficients": self.coefficients,
            "norm_bound": self.norm_bound,
            "confidence": self.confidence,
            "iterations": self.iterations,
            "digits_used": self.digits_used,
            "level_stats": self.level_stats,
            "elapsed_seconds": self.elapsed_seconds,
        }


def _build_parser() -> _Parser:
    p = _Parser(
        prog="intrel",
        description="Search for integer relations among high-precision "
                    "real constants.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", metavar="SPEC",
                     help="preset: algebraic:R,S | bbp16pi | bbp3pisq | "
                          "binom:K | zetabinom:M | bifurcation3 | "
                          "z5powers[:DEGREE]")
    src.add_argument("--input", metavar="PATH",
                     help="vector file ('digits: N' header, one constant "
                          "per line)")
    p.add_argument("--algo", choices=("pslq", "multipair"),
                   default="multipair")
    p.add_argument("--levels", type=int, choices=(1, 2, 3), default=3)
    p.add_argument("--digits", type=int, default=None,
                   help="working precision in decimal digits")
    p.add_argument("--gamma", default=None,
                   help="pivot weight, >= sqrt(4/3) (decimal string)")
    p.add_argument("--beta", type=float, default=0.4,
                   help="multi-pair selection fraction")
    p.add_argument("--max-iters", type=int, default=1_000_000)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker count (default: INTREL_THREADS or 1)")
    p.add_argument("--json", dest="json_path", metavar="PATH", default=None)
    p.add_argument("--log", dest="log_path", metavar="PATH", default=None,
                   help="write one record per iteration")
    return p


def parse_args(argv) -> RunConfig:
    """Validate an argument vector into a complete run configuration."""
    ns = _build_parser().parse_args(argv)
    if ns.input is not None:
        try:
            vec, file_digits = load_input_file(ns.input)
        except (OSError, ValueError) as e:
            raise UsageError(str(e))
        digits = ns.digits if ns.digits is not None else file_digits
        if digits > file_digits:
            raise UsageError(
                f"--digits {digits} exceeds the file's {file_digits}")
        problem = ProblemSpec("file", digits, path=ns.input)
    else:
        try:
            problem = parse_problem(ns.problem, ns.digits)
        except ValueError as e:
            raise UsageError(str(e))
        digits = problem.digits
    if ns.max_iters < 1:
        raise UsageError("--max-iters must be positive")
    if not (0 < ns.beta <= 1):
        raise UsageError("--beta must lie in (0, 1]")
    try:
        policy = EpsilonPolicy(digits)
    except ValueError as e:
        raise UsageError(str(e))
    workers = ns.threads if ns.threads is not None else default_worker_count()
    if workers < 1:
        raise UsageError("--threads must be positive")
    return RunConfig(
        problem=problem,
        policy=policy,
        level_cfg=LevelConfig(levels=ns.levels),
        algo=ns.algo,
        gamma=ns.gamma,
        beta=ns.beta,
        max_iters=ns.max_iters,
        workers=workers,
        json_path=ns.json_path,
        log_path=ns.log_path,
    )


def run_search(cfg: RunConfig, log_sink=None) -> RunReport:
    """Build the input vector, run the search, and package the report."""
    started = time.perf_counter()
    x = build_vector(cfg.problem)
    gamma = None
    if cfg.gamma is not None:
        with workprec(cfg.policy.work_digits):
            gamma = gmpy2.mpfr(cfg.gamma)
    outcome = run_multilevel(
        x, algo=cfg.algo, policy=cfg.policy, cfg=cfg.level_cfg,
        gamma=gamma, beta=cfg.beta, max_iters=cfg.max_iters,
        workers=cfg.workers, log=log_sink,
    )
    elapsed = time.perf_counter() - started
    return RunReport(
        problem=cfg.problem.label(),
        algo=cfg.algo,
        levels=cfg.level_cfg.levels,
        status=outcome.status.value,
        coefficients=[str(c) for c in outcome.coefficients]
        if outcome.coefficients is not None else None,
        norm_bound=format_sci(outcome.norm_bound, 7),
        confidence=format_sci(outcome.confidence, 4)
        if outcome.confidence is not None else None,
        iterations=outcome.iterations,
        digits_used=cfg.policy.work_digits,
        level_stats=outcome.level_stats or {},
        elapsed_seconds=round(elapsed, 3),
    )


def emit_report(report: RunReport, json_path: str | None = None,
                stream=None) -> None:
    """Console summary plus optional machine-readable JSON file."""
    out = stream or sys.stdout
    print(f"status: {report.status}", file=out)
    if report.coefficients is not None:
        print("coefficients:", " ".join(report.coefficients), file=out)
    print(f"norm bound: {report.norm_bound}", file=out)
    if report.confidence is not None:
        print(f"confidence: {report.confidence}", file=out)
    stats = report.level_stats
    per_level = "  ".join(
        f"{name}={stats[name]['iterations']}"
        for name in ("full", "intermediate", "double") if name in stats)
    flushes = "  ".join(
        f"{name}={stats[name]['flushes']}"
        for name in ("double", "intermediate") if name in stats)
    print(f"iterations: {report.iterations}  ({per_level})", file=out)
    if flushes:
        print(f"flushes: {flushes}", file=out)
    print(f"digits: {report.digits_used}  elapsed: "
          f"{report.elapsed_seconds:.3f}s", file=out)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    log_fh = None
    log_sink = None
    if cfg.log_path:
        try:
            log_fh = open(cfg.log_path, "w", encoding="utf-8")
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1

        def log_sink(rec):
            log_fh.write(
                "iter={iter} level={level} ymin_exp={y_min_exp} "
                "ymax_exp={y_max_exp} bound={bound} pairs={pairs}\n"
                .format(**rec))

    try:
        report = run_search(cfg, log_sink=log_sink)
    except Exception as e:  # internal failure: report, exit 1
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    finally:
        if log_fh is not None:
            log_fh.close()
    try:
        emit_report(report, json_path=cfg.json_path)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
