"""``projsq run <scenario> --config FILE --out DIR`` and ``projsq list``.

Exit codes: 0 success, 1 usage error, 2 a scenario check or truncation
diagnostic failed. ``PROJSQ_DIM`` and ``PROJSQ_SEED`` override the config;
command-line flags override both.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import scenarios
from .errors import ProjsqError, TruncationNotConverged
from .kvformat import Params, load_kv


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="projsq", description="Smeared-projector scenarios")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    sub.add_parser("list", help="list scenario names")
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("scenario")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--dim", type=int)
    run.add_argument("--svg", action="store_true")
    return ap


def _env_int(name):
    v = os.environ.get(name)
    if v is None or v == "":
        return None
    try:
        return int(v)
    except ValueError:
        raise _UsageError(f"{name} must be an integer, got {v!r}") from None


def _pick(cli, env, cfg_params: Params, key, default):
    if cli is not None:
        return cli
    if env is not None:
        return env
    return cfg_params.int(key, default) if key in cfg_params else default


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        if args.cmd == "list":
            for name, (fn, dim, min_dim) in scenarios.SCENARIOS.items():
                doc = (fn.__doc__ or "").strip().splitlines()[0]
                print(f"{name:18s} dim={dim:<4d} min_dim={min_dim:<4d} {doc}")
            return 0
        if args.scenario not in scenarios.SCENARIOS:
            raise _UsageError(f"unknown scenario {args.scenario!r}; try 'projsq list'")
        try:
            raw = load_kv(args.config)
        except OSError as exc:
            raise _UsageError(f"cannot read config: {exc}") from None
        params = Params(raw)
        if "name" in params and params.str("name") != args.scenario:
            raise _UsageError(f"config is for {params.str('name')!r}, not {args.scenario!r}")
        default_dim = scenarios.SCENARIOS[args.scenario][1]
        dim = _pick(args.dim, _env_int("PROJSQ_DIM"), params, "dim", default_dim)
        seed = _pick(args.seed, _env_int("PROJSQ_SEED"), params, "seed", 0)
        out = args.out if args.out else params.str("output_dir", ".")
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ProjsqError as exc:
        print(f"projsq: error: {exc}", file=sys.stderr)
        return 1

    try:
        res = scenarios.run_scenario(args.scenario, params, dim=dim, seed=seed)
        status = 0 if res.passed else 2
    except TruncationNotConverged as exc:
        print(f"projsq: truncation not converged: {exc}", file=sys.stderr)
        res, status = exc.result, 2
    except ProjsqError as exc:
        print(f"projsq: error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, ValueError) else 2

    if res is not None:
        for path in scenarios.write_outputs(res, out, svg=args.svg):
            print(path)
        for c in res.checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.detail}".rstrip())
    return status


if __name__ == "__main__":
    sys.exit(main())
