"""Batch experiment driver.

Subcommands:

* ``sample``    -- draw one sample (and its trace) from an oracle.
* ``bench``     -- round/query scaling runs over an oracle family, CSV out.
* ``verify``    -- run a named property suite, JSON report out.
* ``hardness``  -- generate / query / probe block-code hard instances.

Exit codes: 0 success; 1 malformed flags; 2 oracle or instance errors
(zero-measure pinning, parse failure, infeasible parameters); 3 a verify
suite found a failing check.

All outputs are derived purely from the flags (including --seed) and are
byte-identical across runs, except the wall_time_ms CSV column.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import BENCH_FAMILIES, fit_scaling, fit_to_json_str, rows_to_csv, run_bench
from .coupler import CouplerKind
from .families import build_builtin
from .hardness import (
    ParameterInfeasible,
    count_hypercube,
    generate,
    load_instance,
    probe_no_info,
    save_instance,
)
from .oracle import OracleError, oracle_from_json
from .sampler import Mode, PermutationMode, SamplerConfig, run_sampler
from .verify import VERIFY_SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ORACLE = 2
EXIT_CHECK_FAILED = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _dump_json(data: dict, path: str | None) -> None:
    text = json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_oracle(spec: str):
    if spec.startswith("builtin:"):
        return build_builtin(spec)
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValueError(f"cannot read oracle file {spec!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"oracle file {spec!r} is not valid JSON: {exc}") from exc
    if isinstance(data, dict) and "variant" not in data and "codes" in data and "blocks" in data:
        # a hardness instance file: sample through its counting-oracle view
        from .hardness import HardnessInstance, marginal_oracle_view

        return marginal_oracle_view(HardnessInstance.from_json(data))
    return oracle_from_json(data)


def _parse_theta(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"theta must be 'auto' or an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("theta must be >= 1")
    return value


def _parse_n_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n list {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"bad n list {text!r}")
    return values


def _parse_pin(text: str) -> dict[int, int]:
    pins: dict[int, int] = {}
    if not text:
        return pins
    for item in text.split(","):
        coord, _, value = item.partition("=")
        try:
            pos, bit = int(coord), int(value)
        except ValueError:
            raise ValueError(f"bad pin {item!r}; expected coord=value") from None
        if pos in pins:
            raise ValueError(f"coordinate {pos} pinned twice")
        pins[pos] = bit
    return pins


def _parse_override(text: str) -> tuple[int, int, list[int]]:
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad override {text!r}; expected r,m,a1,...,ar")
    if len(parts) < 3:
        raise argparse.ArgumentTypeError("override must be r,m,a1,...,ar")
    r, m = parts[0], parts[1]
    a = parts[2:]
    if len(a) != r:
        raise argparse.ArgumentTypeError(f"override lists {len(a)} slack values but r={r}")
    return r, m, a


def build_parser() -> _Parser:
    parser = _Parser(prog="countsample", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw one sample from an oracle")
    p_sample.add_argument("--oracle", required=True, help="instance file or builtin:<family>:k=v,...")
    p_sample.add_argument("--mode", choices=[m.value for m in Mode], default="sequential")
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--coupler", choices=[c.value for c in CouplerKind], default="min")
    p_sample.add_argument("--theta", type=_parse_theta, default="auto")
    p_sample.add_argument(
        "--permutation", choices=[p.value for p in PermutationMode], default="random"
    )
    p_sample.add_argument("--trace", help="write the round trace JSON to this path")
    p_sample.add_argument("--out", help="write the sample JSON here (default stdout)")

    p_bench = sub.add_parser("bench", help="round-complexity scaling runs")
    p_bench.add_argument("--oracle-family", choices=BENCH_FAMILIES, required=True)
    p_bench.add_argument("--n-list", type=_parse_n_list, required=True)
    p_bench.add_argument("--q", type=int, default=2)
    p_bench.add_argument("--reps", type=int, default=10)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--csv", required=True, help="output CSV path")
    p_bench.add_argument("--fit", help="write the scaling-fit JSON to this path")
    p_bench.add_argument("--coupler", choices=[c.value for c in CouplerKind], default="min")
    p_bench.add_argument("--theta", type=_parse_theta, default="auto")
    p_bench.add_argument(
        "--permutation", choices=[p.value for p in PermutationMode], default="random"
    )

    p_verify = sub.add_parser("verify", help="run a property suite")
    p_verify.add_argument("--suite", choices=sorted(VERIFY_SUITES), required=True)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--report", help="write the report JSON here (default stdout)")

    p_hard = sub.add_parser("hardness", help="block-code hard instances")
    hard_sub = p_hard.add_subparsers(dest="hardness_command", required=True)

    p_gen = hard_sub.add_parser("gen", help="generate an instance file")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--c", type=float, default=1.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument(
        "--override", type=_parse_override, help="explicit r,m,a1,...,ar (toy scale)"
    )
    p_gen.add_argument("--out", required=True)

    p_query = hard_sub.add_parser("query", help="hypercube counting query")
    p_query.add_argument("--instance", required=True)
    p_query.add_argument("--pin", default="", help='hypercube pins, e.g. "0=1,5=0"')

    p_probe = hard_sub.add_parser("probe", help="information-hiding frequency probe")
    p_probe.add_argument("--instance", required=True)
    p_probe.add_argument("--trials", type=int, default=1000)
    p_probe.add_argument("--seed", type=int, default=0)
    p_probe.add_argument("--out", help="write the probe report here (default stdout)")

    return parser


def _cmd_sample(args) -> int:
    oracle = _load_oracle(args.oracle)
    config = SamplerConfig(
        seed=args.seed,
        coupler=CouplerKind(args.coupler),
        mode=Mode(args.mode),
        theta=args.theta,
        permutation=PermutationMode(args.permutation),
    )
    sample, trace = run_sampler(oracle, config)
    # mode and theta deliberately excluded: all modes draw the same sample
    # for one (seed, coupler, permutation), and the payloads must match
    payload = {
        "values": list(sample.values),
        "n": oracle.n,
        "q": oracle.q,
        "oracle": oracle.variant,
        "seed": args.seed,
        "coupler": args.coupler,
        "permutation": args.permutation,
    }
    _dump_json(payload, args.out)
    if args.trace:
        _dump_json(trace.to_json(), args.trace)
    return EXIT_OK


def _cmd_bench(args) -> int:
    rows = run_bench(
        family=args.oracle_family,
        n_list=args.n_list,
        q=args.q,
        reps=args.reps,
        seed=args.seed,
        coupler=CouplerKind(args.coupler),
        permutation=PermutationMode(args.permutation),
        theta=args.theta,
    )
    with open(args.csv, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows))
    if args.fit:
        fit = fit_scaling(rows)
        with open(args.fit, "w", encoding="utf-8") as fh:
            fh.write(fit_to_json_str(fit) + "\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = run_suite(args.suite, args.seed)
    _dump_json(report, args.report)
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def _cmd_hardness(args) -> int:
    if args.hardness_command == "gen":
        instance = generate(args.n, args.c, args.seed, override=args.override)
        save_instance(instance, args.out)
        return EXIT_OK
    if args.hardness_command == "query":
        instance = load_instance(args.instance)
        pins = _parse_pin(args.pin)
        count = count_hypercube(instance, pins)
        sys.stdout.write(("ZERO" if count is None else str(count)) + "\n")
        return EXIT_OK
    if args.hardness_command == "probe":
        instance = load_instance(args.instance)
        report = probe_no_info(instance, args.trials, args.seed)
        _dump_json(report, args.out)
        return EXIT_OK
    raise ValueError(f"unknown hardness command {args.hardness_command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "hardness":
            return _cmd_hardness(args)
        parser.error(f"unknown command {args.command!r}")
    except (OracleError, ParameterInfeasible, ValueError, KeyError) as exc:
        sys.stderr.write(f"countsample: error: {exc}\n")
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
