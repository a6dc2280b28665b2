"""Command-line interface: ``smale solve | sample | experiment | report``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from ._parallel import THREADS_ENV
from .algebra import DegreePattern, point_to_list, system_from_dict, system_to_dict
from .errors import (
    DegeneratePencilError,
    NonConvergenceError,
    SingularJacobianError,
    SmaleError,
)
from .experiments import KINDS, append_ledger, read_ledger, render_report, run_experiment
from .newton import AlhParams
from .sampling import sample_rho_st
from .solvers import lv_solve, md_solve, solve_all

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DEFAULT_LEDGER = "results.jsonl"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything needed to replay a command; round-trips through JSON."""

    command: str
    seed: int = 0
    n: Optional[int] = None
    degrees: Optional[list[int]] = None
    alh: dict[str, Any] = field(default_factory=dict)
    threads: Optional[int] = None
    options: dict[str, Any] = field(default_factory=dict)

    @property
    def pattern(self) -> Optional[DegreePattern]:
        if self.degrees is None:
            return None
        n = self.n if self.n is not None else len(self.degrees)
        return DegreePattern(n, tuple(self.degrees))

    def params(self) -> AlhParams:
        return replace(AlhParams(), **self.alh)

    def to_dict(self) -> dict[str, Any]:
        return {"schema": 1, **asdict(self)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        data = {k: v for k, v in data.items() if k != "schema"}
        return cls(**data)


def _degrees(values: Sequence[str]) -> list[int]:
    out = []
    for v in values:
        out.extend(int(p) for p in v.replace(",", " ").split())
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker processes (default: ${THREADS_ENV} or 1)")
    p.add_argument("--save-config", metavar="FILE", help="write the resolved run config as JSON")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smale", description="Adaptive linear homotopy solvers and experiments.")
    p.add_argument("--version", action="store_true", help="print version and ALH constants")
    p.add_argument("--config", metavar="FILE", help="replay a saved run config")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("solve", help="solve one system read from JSON")
    s.add_argument("--algorithm", choices=("lv", "md", "all"), default="lv")
    s.add_argument("--input", required=True)
    s.add_argument("--max-iters", type=int, default=AlhParams.max_iters)
    s.add_argument("--trace", metavar="FILE", help="write the ALH step trace as JSON lines")
    s.add_argument("--out", metavar="FILE")
    _add_common(s)

    r = sub.add_parser("sample", help="draw start pairs")
    r.add_argument("what", choices=("rho-st",))
    r.add_argument("--n", type=int)
    r.add_argument("--degrees", nargs="+", required=True)
    r.add_argument("--count", type=int, default=1)
    r.add_argument("--out", metavar="FILE")
    _add_common(r)

    e = sub.add_parser("experiment", help="run a Monte Carlo experiment and append it to a ledger")
    e.add_argument("kind", choices=[k.replace("_", "-") for k in KINDS] + list(KINDS))
    e.add_argument("--n", type=int)
    e.add_argument("--degrees", nargs="+", required=True)
    e.add_argument("--trials", type=int, required=True)
    e.add_argument("--sigma", type=float, default=1.0)
    e.add_argument("--center", metavar="FILE", help="center system (JSON)")
    e.add_argument("--max-iters", type=int, default=AlhParams.max_iters)
    e.add_argument("--out", metavar="FILE", default=DEFAULT_LEDGER, help="JSON-lines ledger")
    _add_common(e)

    t = sub.add_parser("report", help="tabulate a results ledger")
    t.add_argument("--ledger", default=DEFAULT_LEDGER)
    t.add_argument("--format", choices=("text", "csv"), default="text")
    t.add_argument("--out", metavar="FILE")
    _add_common(t)
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, seed=args.seed, threads=args.threads)
    if getattr(args, "max_iters", None) is not None and args.max_iters != AlhParams.max_iters:
        cfg.alh["max_iters"] = args.max_iters
    if getattr(args, "degrees", None) is not None:
        cfg.degrees = _degrees(args.degrees)
        cfg.n = args.n
    skip = {"command", "seed", "threads", "max_iters", "degrees", "n", "save_config", "version", "config"}
    cfg.options = {k: v for k, v in vars(args).items() if k not in skip}
    return cfg


def _load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _emit(payload: Any, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _failure(exc: Exception) -> int:
    info: dict[str, Any] = {"schema": 1, "error": type(exc).__name__, "message": str(exc)}
    trace = getattr(exc, "trace", None)
    if trace is not None:
        info["iterations"] = trace.k
        info["outcome"] = trace.outcome
    start = getattr(exc, "start", None)
    if start is not None:
        g, zeta = start
        info["start"] = {"g": system_to_dict(g), "zeta": point_to_list(zeta)}
    print(json.dumps(info), file=sys.stderr)
    return EXIT_FAILURE


def _solve(cfg: RunConfig) -> int:
    o = cfg.options
    data = _load_json(o["input"])
    try:
        f = system_from_dict(data)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"{o['input']}: {exc}") from exc
    params = cfg.params()
    algo = o.get("algorithm", "lv")
    if algo == "all":
        results = solve_all(f, params, threads=cfg.threads)
        payload = {"schema": 1, "algorithm": "all", "results": [r.to_dict() for r in results]}
        _emit(payload, o.get("out"))
        return EXIT_OK if all(r.ok for r in results) else EXIT_FAILURE
    result = lv_solve(f, cfg.seed, params) if algo == "lv" else md_solve(f, params)
    if o.get("trace") and result.trace is not None:
        result.trace.meta["algorithm"] = algo
        result.trace.write_jsonl(o["trace"])
    payload = result.to_dict()
    payload["algorithm"] = algo
    _emit(payload, o.get("out"))
    return EXIT_OK


def _sample(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    pattern = cfg.pattern
    lines = []
    for _ in range(cfg.options.get("count", 1)):
        g, zeta = sample_rho_st(pattern, rng)
        lines.append(json.dumps({"schema": 1, "g": system_to_dict(g), "zeta": point_to_list(zeta)}))
    text = "\n".join(lines) + "\n"
    out = cfg.options.get("out")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _experiment(cfg: RunConfig) -> int:
    o = cfg.options
    center = None
    if o.get("center"):
        try:
            center = system_from_dict(_load_json(o["center"]))
        except (ValueError, TypeError, KeyError) as exc:
            raise UsageError(f"{o['center']}: {exc}") from exc
    result = run_experiment(o["kind"], cfg.pattern, o["trials"], cfg.seed, sigma=o.get("sigma", 1.0),
                            center=center, alh=cfg.params(), threads=cfg.threads)
    append_ledger(o.get("out") or DEFAULT_LEDGER, result)
    print(render_report([result.to_dict()]), end="")
    return EXIT_OK


def _report(cfg: RunConfig) -> int:
    o = cfg.options
    try:
        records = read_ledger(o.get("ledger") or DEFAULT_LEDGER)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed ledger at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise UsageError(f"cannot read ledger: {exc.strerror}") from exc
    text = render_report(records, o.get("format", "text"))
    if o.get("out"):
        Path(o["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {"solve": _solve, "sample": _sample, "experiment": _experiment, "report": _report}


def dispatch(cfg: RunConfig) -> int:
    try:
        return _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"smale: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergenceError, SingularJacobianError, DegeneratePencilError) as exc:
        return _failure(exc)
    except SmaleError as exc:
        print(f"smale: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def version_text() -> str:
    p = AlhParams()
    return (f"smale {__version__}\n"
            f"lambda = {p.lam}\nC = {p.C}\nepsilon = {p.eps}\nu0 = {p.u0!r}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.version:
        sys.stdout.write(version_text())
        return EXIT_OK
    if args.config:
        try:
            cfg = RunConfig.from_dict(_load_json(args.config))
        except UsageError as exc:
            print(f"smale: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except TypeError as exc:
            print(f"smale: error: bad config: {exc}", file=sys.stderr)
            return EXIT_USAGE
        return dispatch(cfg)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = config_from_args(args)
        if cfg.degrees is not None:
            cfg.pattern
    except ValueError as exc:
        print(f"smale: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.save_config:
        Path(args.save_config).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
