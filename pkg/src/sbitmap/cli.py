"""Operator command line.

Subcommands:
  dimension  solve the capacity equation for a bit budget or target error
  rates      dump the p/q/t schedule as CSV
  count      count distinct lines from a file or stdin, flat or keyed
  simulate   Monte Carlo error sweep for one sketch kind
  compare    multi-sketch sweeps and analytic memory tables

Exit codes: 0 success, 1 usage or invalid request, 2 runtime failure
(I/O, exceeded resource guards). Output is deterministic given flags,
seed and input bytes; the hash seed falls back to $SBITMAP_SEED.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from sbitmap import harness
from sbitmap.dimensioning import build_rate_table, required_memory, solve_capacity
from sbitmap.errors import Error, InvalidInput, NoSolution, ResourceLimit
from sbitmap.sketch import DEFAULT_SAMPLER_WIDTH, SBitmap

DEFAULT_MAX_KEYS = 65536
_DEFAULT_N = 2**20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; remap to the documented usage code 1.
    def error(self, message):
        raise UsageError(message)


class SketchRegistry:
    """Keyed family of sketches sharing one dimensioning and seed.

    Sketches are created on first sight of a key, capped at max_keys;
    exceeding the cap is an error rather than silent eviction, since
    eviction would corrupt counts.
    """

    def __init__(self, params, rates, seed=0, d=DEFAULT_SAMPLER_WIDTH,
                 max_keys=DEFAULT_MAX_KEYS):
        if max_keys < 1:
            raise InvalidInput(f"max_keys must be >= 1, got {max_keys}")
        self._params = params
        self._rates = rates
        self._seed = seed
        self._d = d
        self._max_keys = max_keys
        self._sketches: dict[bytes, SBitmap] = {}

    def __len__(self) -> int:
        return len(self._sketches)

    def update(self, key: bytes, item: bytes) -> bool:
        sketch = self._sketches.get(key)
        if sketch is None:
            if len(self._sketches) >= self._max_keys:
                raise ResourceLimit(
                    f"registry capped at {self._max_keys} keys; refusing to evict"
                )
            sketch = SBitmap(self._params, self._rates, seed=self._seed, d=self._d)
            self._sketches[key] = sketch
        return sketch.update(item)

    def items(self) -> list[tuple[bytes, SBitmap]]:
        return sorted(self._sketches.items())


def _count_value(text: str) -> int:
    """Counts on the command line: 4096, 1e6, 2^20 all work."""
    token = text.strip()
    try:
        return int(token)
    except ValueError:
        pass
    if "^" in token:
        base, _, exp = token.partition("^")
        try:
            return int(base) ** int(exp)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad count {text!r}") from exc
    try:
        value = float(token)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad count {text!r}") from exc
    if value != int(value):
        raise argparse.ArgumentTypeError(f"count {text!r} is not an integer")
    return int(value)


def _count_grid(text: str) -> list[int]:
    """Comma list of counts; `a..b` expands by decades (b = a*10^k)."""
    grid: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            start_text, _, stop_text = token.partition("..")
            start, stop = _count_value(start_text), _count_value(stop_text)
            if start < 1 or stop < start:
                raise argparse.ArgumentTypeError(f"bad range {token!r}")
            value = start
            while value < stop:
                grid.append(value)
                value *= 10
            if value != stop:
                raise argparse.ArgumentTypeError(
                    f"range {token!r} must span whole decades"
                )
            grid.append(stop)
        else:
            grid.append(_count_value(token))
    if not grid:
        raise argparse.ArgumentTypeError(f"empty grid {text!r}")
    return grid


def _epsilon_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from exc


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("SBITMAP_SEED", "0"))


def _resolve_params(args):
    if args.memory_bits is not None:
        m = args.memory_bits
    else:
        m = required_memory(args.epsilon, args.max_cardinality)
    return solve_capacity(m, args.max_cardinality)


def _print_rates(params, out) -> None:
    rates = build_rate_table(params)
    out.write("k,p,q,t\n")
    for k in range(1, params.m + 1):
        out.write(
            f"{k},{rates.p[k]:.12g},{rates.q[k]:.12g},{rates.t[k]:.12g}\n"
        )


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w")


def cmd_dimension(args) -> int:
    params = _resolve_params(args)
    info = {
        "m": params.m,
        "N": params.N,
        "C": params.C,
        "epsilon": params.epsilon,
        "r": params.r,
        "b_max": params.b_max,
        "d": args.sampler_width,
    }
    if args.json:
        print(json.dumps(info))
    else:
        for key, value in info.items():
            print(f"{key} = {value}")
    if args.dump_rates:
        _print_rates(params, sys.stdout)
    return 0


def cmd_rates(args) -> int:
    _print_rates(_resolve_params(args), sys.stdout)
    return 0


def _read_lines(path: str):
    stream = sys.stdin.buffer if path == "-" else open(path, "rb")
    try:
        for raw in stream:
            yield raw[:-1] if raw.endswith(b"\n") else raw
    finally:
        if stream is not sys.stdin.buffer:
            stream.close()


def cmd_count(args) -> int:
    seed = _resolve_seed(args)
    params = _resolve_params(args)
    rates = build_rate_table(params)
    if args.keyed:
        registry = SketchRegistry(
            params, rates, seed=seed, d=args.sampler_width, max_keys=args.max_keys
        )
        malformed = 0
        for line in _read_lines(args.input):
            tab = line.find(b"\t")
            if tab < 0:
                malformed += 1
                continue
            registry.update(line[:tab], line[tab + 1 :])
        if malformed:
            print(f"skipped {malformed} malformed lines (no tab)", file=sys.stderr)
        rows = [
            (key.decode("utf-8", "replace"), sketch.estimate())
            for key, sketch in registry.items()
        ]
        if args.json:
            print(json.dumps([
                {"key": key, "n_hat": est.n_hat, "fill": est.fill_used,
                 "saturated": est.saturated}
                for key, est in rows
            ]))
        else:
            print("key,n_hat,fill,saturated")
            for key, est in rows:
                print(f"{key},{est.n_hat:.10g},{est.fill_used},{str(est.saturated).lower()}")
        return 0
    sketch = SBitmap(params, rates, seed=seed, d=args.sampler_width)
    for line in _read_lines(args.input):
        sketch.update(line)
    est = sketch.estimate()
    if args.json:
        print(json.dumps(
            {"n_hat": est.n_hat, "fill": est.fill_used, "saturated": est.saturated}
        ))
    else:
        print("n_hat,fill,saturated")
        print(f"{est.n_hat:.10g},{est.fill_used},{str(est.saturated).lower()}")
    return 0


def _default_grid(N: int) -> list[int]:
    return [2**k for k in range(4, 21) if 2**k <= N]


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    grid = args.n_grid or _default_grid(args.max_cardinality)
    factory = harness.sketch_factory(
        args.sketch, args.memory_bits, args.max_cardinality,
        seed=seed, d=args.sampler_width,
    )
    reports = harness.rrmse_sweep(factory, grid, args.replicates, seed=seed)
    out = _open_out(args.out)
    try:
        harness.write_reports_csv(reports, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_compare(args) -> int:
    if args.table == "memory":
        if not args.epsilons or not args.Ns:
            raise UsageError("--table memory needs --epsilons and --Ns")
        rows = harness.memory_table(args.epsilons, args.Ns)
        out = _open_out(args.out)
        try:
            harness.write_memory_csv(rows, out)
        finally:
            if out is not sys.stdout:
                out.close()
        return 0
    if args.memory_bits is None:
        raise UsageError("sweep comparison needs --memory-bits")
    seed = _resolve_seed(args)
    grid = args.n_grid or _default_grid(args.max_cardinality)
    kinds = [k.strip() for k in args.sketches.split(",") if k.strip()]
    if not kinds:
        raise UsageError("empty --sketches list")
    named = []
    for kind in kinds:
        factory = harness.sketch_factory(
            kind, args.memory_bits, args.max_cardinality,
            seed=seed, d=args.sampler_width,
        )
        named.append((kind, harness.rrmse_sweep(factory, grid, args.replicates, seed=seed)))
    out = _open_out(args.out)
    try:
        harness.write_comparison_csv(named, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _add_sizing(parser, require_cardinality=True):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--memory-bits", type=_count_value,
                       help="bitmap budget in bits")
    group.add_argument("--epsilon", type=float,
                       help="target relative error in (0,1); sizes memory for it")
    parser.add_argument(
        "--max-cardinality", type=_count_value, required=require_cardinality,
        default=None if require_cardinality else _DEFAULT_N,
        help="largest count the sketch must support"
        + ("" if require_cardinality else f" (default {_DEFAULT_N})"),
    )
    parser.add_argument("--sampler-width", type=int, default=DEFAULT_SAMPLER_WIDTH,
                        help="sampler bits d (default %(default)s)")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbitmap", description="Self-learning bitmap distinct counter")
    sub = parser.add_subparsers(dest="command", required=True)

    dim = sub.add_parser("dimension", help="solve the capacity equation")
    _add_sizing(dim)
    dim.add_argument("--dump-rates", action="store_true",
                     help="also dump the p/q/t schedule as CSV")
    dim.add_argument("--json", action="store_true")
    dim.set_defaults(func=cmd_dimension)

    rates = sub.add_parser("rates", help="dump the p/q/t schedule as CSV")
    _add_sizing(rates)
    rates.set_defaults(func=cmd_rates)

    count = sub.add_parser("count", help="count distinct lines")
    count.add_argument("input", help="input path, or - for stdin")
    count.add_argument("--keyed", action="store_true",
                       help="split lines at the first tab into (key, item)")
    count.add_argument("--max-keys", type=int, default=DEFAULT_MAX_KEYS,
                       help="keyed-mode registry cap (default %(default)s)")
    count.add_argument("--seed", type=_count_value, default=None,
                       help="hash seed (default $SBITMAP_SEED or 0)")
    count.add_argument("--json", action="store_true")
    _add_sizing(count)
    count.set_defaults(func=cmd_count)

    sim = sub.add_parser("simulate", help="Monte Carlo error sweep")
    sim.add_argument("--sketch", default="sbitmap",
                     choices=("sbitmap", "linear", "loglog", "hyperloglog", "hll"))
    sim.add_argument("--n-grid", type=_count_grid, default=None,
                     help="comma list of counts; default powers of 2 up to N")
    sim.add_argument("--replicates", type=int, default=harness.DEFAULT_REPLICATES)
    sim.add_argument("--seed", type=_count_value, default=None)
    sim.add_argument("--out", default="-", help="output CSV path (default stdout)")
    _add_sizing(sim, require_cardinality=False)
    sim.set_defaults(func=cmd_simulate)

    comp = sub.add_parser("compare", help="multi-sketch sweep or memory table")
    comp.add_argument("--table", choices=("memory",), default=None,
                      help="emit an analytic table instead of sweeping")
    comp.add_argument("--sketches", default="sbitmap,hyperloglog,loglog,linear",
                      help="comma list of kinds for the sweep")
    comp.add_argument("--epsilons", type=_epsilon_list, default=None,
                      help="memory table: comma list of target errors")
    comp.add_argument("--Ns", type=_count_grid, default=None,
                      help="memory table: counts, e.g. 1e3..1e7")
    comp.add_argument("--memory-bits", type=_count_value, default=None)
    comp.add_argument("--max-cardinality", type=_count_value, default=_DEFAULT_N)
    comp.add_argument("--sampler-width", type=int, default=DEFAULT_SAMPLER_WIDTH)
    comp.add_argument("--n-grid", type=_count_grid, default=None)
    comp.add_argument("--replicates", type=int, default=harness.DEFAULT_REPLICATES)
    comp.add_argument("--seed", type=_count_value, default=None)
    comp.add_argument("--out", default="-")
    comp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvalidInput, NoSolution) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ResourceLimit, Error, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
