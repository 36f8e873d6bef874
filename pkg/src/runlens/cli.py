"""Batch CLI: the same analyses and exports as the service, written to disk.

`runlens serve` starts the HTTP service; `runlens analyze` writes one
analysis response as JSON (coverage also gets its embedding CSV, merge-graph
a DOT file); `runlens export` writes one artifact.  Flags can also come from
RUNLENS_* environment variables; explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from typing import Any, Optional

from .analyses import RunRegistry, available_operations
from .cache import DEFAULT_CACHE_BYTES
from .errors import RunLensError, ValidationError
from .exports import available_artifacts, export_artifact

_PARAM_FLAGS = [
    # (flag, parameter name, help)
    ("--candidate", "candidate_id", "candidate id the analysis is about"),
    ("--node", "node", "pipeline node id (use __source__ for the input data)"),
    ("--row", "row", "row index for the local surrogate"),
    ("--n-samples", "n_samples", "perturbation sample count for the local surrogate"),
    ("--max-leaf-nodes", "max_leaf_nodes", "leaf budget for surrogate trees"),
    ("--limit", "limit", "preview row limit for intermediate datasets"),
    ("--at", "at", "time-lapse position (omit for the final frame)"),
    ("--bins", "bins", "histogram bin count for sampling history"),
    ("--hyperparameter", "hyperparameter", "hyperparameter name for sampling history"),
    ("--structure-of", "structure_of",
     "restrict hp importance to candidates sharing this candidate's structure"),
]


def _env(name: str, default: Any = None) -> Any:
    return os.environ.get(f"RUNLENS_{name}", default)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="runlens",
        description="Analytics service and batch analyses for AutoML run histories.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_out: bool) -> None:
        p.add_argument("--run", default=_env("RUN"),
                       help="run-history JSON file (env: RUNLENS_RUN)")
        p.add_argument("--seed", type=int, default=int(_env("SEED", 0)),
                       help="run-level seed for refits and down-sampling "
                            "(env: RUNLENS_SEED)")
        p.add_argument("--cache-mb", type=int, dest="cache_mb",
                       default=int(_env("CACHE_MB", DEFAULT_CACHE_BYTES // 2**20)),
                       help="response cache budget in MiB (env: RUNLENS_CACHE_MB)")
        if with_out:
            p.add_argument("--out", default=_env("OUT", "."),
                           help="output directory (env: RUNLENS_OUT)")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    common(p_serve, with_out=False)
    p_serve.add_argument("--port", type=int, default=int(_env("PORT", 8300)),
                         help="listen port (env: RUNLENS_PORT)")
    p_serve.add_argument("--host", default=_env("HOST", "127.0.0.1"),
                         help="listen address (env: RUNLENS_HOST)")

    ops = sorted(available_operations()) + ["merge-graph"]
    p_analyze = sub.add_parser("analyze", help="write one analysis to disk")
    p_analyze.add_argument("operation", choices=ops, metavar="OPERATION",
                           help=f"one of: {', '.join(ops)}")
    p_analyze.add_argument("run_file", nargs="?",
                           help="run-history JSON file (same as --run)")
    common(p_analyze, with_out=True)
    for flag, dest, help_text in _PARAM_FLAGS:
        p_analyze.add_argument(flag, dest=dest, default=None, help=help_text)

    arts = sorted(available_artifacts())
    p_export = sub.add_parser("export", help="write one artifact to disk")
    p_export.add_argument("artifact", choices=arts, metavar="ARTIFACT",
                          help=f"one of: {', '.join(arts)}")
    p_export.add_argument("run_file", nargs="?",
                          help="run-history JSON file (same as --run)")
    common(p_export, with_out=True)
    for flag, dest, help_text in _PARAM_FLAGS:
        if dest in ("candidate_id", "node", "max_leaf_nodes", "structure_of", "at"):
            p_export.add_argument(flag, dest=dest, default=None, help=help_text)

    return parser


def _run_path(args: argparse.Namespace) -> str:
    path = getattr(args, "run_file", None) or args.run
    if not path:
        raise ValidationError("no run file given (positional argument, "
                              "--run, or RUNLENS_RUN)")
    return path


def _registry(args: argparse.Namespace) -> RunRegistry:
    return RunRegistry(seed=args.seed, cache_bytes=args.cache_mb * 2**20)


def _collect_params(args: argparse.Namespace, names: tuple[str, ...]) -> dict:
    return {n: getattr(args, n) for n in names
            if getattr(args, n, None) is not None}


def _slug(value: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", value)


def _suffix(params: dict) -> str:
    return "".join(f"-{k}-{_slug(str(v))}" for k, v in sorted(params.items()))


def _write(path: str, content: bytes) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(content)
    print(path)


def _cmd_serve(args: argparse.Namespace) -> int:
    registry = _registry(args)
    path = args.run
    if not path:
        raise ValidationError("no run file given (--run or RUNLENS_RUN)")
    if os.path.isdir(path):
        registry.add_directory(path)
    else:
        registry.add_file(path)
    from .service import serve
    serve(registry, host=args.host, port=args.port)
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    registry = _registry(args)
    bundle = registry.add_file(_run_path(args))
    names = tuple(dest for _, dest, _ in _PARAM_FLAGS)
    params = _collect_params(args, names)
    if args.operation == "merge-graph":
        at = params.pop("at", None)
        if params:
            raise RunLensError(
                f"merge-graph takes only --at, got: {', '.join(sorted(params))}")
        t = float("inf") if at is None else float(at)
        dot = bundle.snapshots.at(t).to_dot()
        suffix = "" if at is None else f"-at-{_slug(str(float(at)))}"
        _write(os.path.join(args.out, f"merge-graph{suffix}.dot"),
               dot.encode("utf-8"))
        return 0
    body = registry.render(bundle.run_id, args.operation, params)
    name = f"{args.operation}{_suffix(params)}.json"
    _write(os.path.join(args.out, name), body)
    if args.operation == "coverage":
        artifact = export_artifact(bundle, "coverage-embedding",
                                   {"at": params.get("at")})
        _write(os.path.join(args.out, artifact.filename), artifact.content)
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    registry = _registry(args)
    bundle = registry.add_file(_run_path(args))
    params = _collect_params(
        args, ("candidate_id", "node", "max_leaf_nodes", "structure_of", "at"))
    artifact = export_artifact(bundle, args.artifact, params)
    _write(os.path.join(args.out, artifact.filename), artifact.content)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        return _cmd_export(args)
    except RunLensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
