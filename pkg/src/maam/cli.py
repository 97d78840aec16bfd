"""Command-line front end: ``analyzer prog.lam [flags]``.

Exit status is 0 on completion, 2 when the fuel runs out before a fixpoint
(the partial result is still reported) and 1 for usage, file or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .domains import ConcreteDomain, Domain
from .engine import DEFAULT_FUEL, Config, Facts, make_value_domain, oracle_clock, oracle_facts, report, run_fixpoint
from .oracle import collect
from .syntax import ParseError, parse_program, uses_input
from .timing import SITE, STACK_ALLOCATORS

EXIT_OK, EXIT_USAGE, EXIT_FUEL = 0, 1, 2

DATA_STORE_FLAGS = {"path-sen": "path", "flow-sen": "flow", "flow-insen": "flow-insen"}
STACK_STORE_FLAGS = {"path-sen": "path", "flow-insen": "flow-insen"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _non_negative(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {n}")
    return n


def _positive(text: str) -> int:
    n = _non_negative(text)
    if n == 0:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="analyzer", description="Abstract interpretation of λIF programs.")
    p.add_argument("program", help="path to a program file")
    p.add_argument("--domain", choices=("sign", "const"), default="const")
    p.add_argument("--kcfa", type=_non_negative, default=0, metavar="N", help="call-site depth")
    p.add_argument("--gc", action="store_true", help="abstract garbage collection")
    p.add_argument("--data-store", choices=tuple(DATA_STORE_FLAGS), default="path-sen")
    p.add_argument("--stack-store", choices=tuple(STACK_STORE_FLAGS), default="path-sen")
    p.add_argument("--stack-alloc", choices=STACK_ALLOCATORS, default=SITE, help="continuation address scheme")
    p.add_argument("--concrete", action="store_true", help="run the reference machine instead")
    p.add_argument("--input", type=int, default=None, help="value of `input` in concrete runs")
    p.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--mcfa", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--ocfa", action="store_true", help=argparse.SUPPRESS)
    return p


def parse_args(argv) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    for flag in ("mcfa", "ocfa"):
        if getattr(args, flag):
            raise UsageError(f"--{flag} is not supported")
    if args.concrete and (args.data_store, args.stack_store) != ("path-sen", "path-sen"):
        raise UsageError("--concrete runs with path-sensitive stores only")
    return args


def config_from_args(args: argparse.Namespace) -> Config:
    if args.concrete:
        return Config.concrete_run(args.input, args.gc, args.fuel, args.stack_alloc)
    return Config(
        domain=args.domain,
        k=args.kcfa,
        data_store=DATA_STORE_FLAGS[args.data_store],
        stack_store=STACK_STORE_FLAGS[args.stack_store],
        gc=args.gc,
        input=args.input,
        fuel=args.fuel,
        stack_alloc=args.stack_alloc,
    )


# -- rendering ----------------------------------------------------------------


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def facts_json(facts: Facts, domain: Domain) -> dict:
    labels = {}
    for label, lf in facts.labels.items():
        worlds = [{name: domain.describe(v) for name, v in world} for world in lf.worlds]
        labels[str(label)] = {
            "vars": {name: domain.describe(v) for name, v in lf.vars.items()},
            "worlds": len(lf.worlds),
            "world_values": sorted(worlds, key=_canonical),
            "configs": lf.configs,
        }
    return labels


def render_json(facts: Facts, domain: Domain, meta: dict) -> str:
    doc = {"labels": facts_json(facts, domain), "meta": meta}
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)


def _describe_text(domain: Domain, v) -> str:
    return _canonical(domain.describe(v))


def render_text(facts: Facts, domain: Domain, meta: dict) -> str:
    rows = [("label", "configs", "worlds", "vars")]
    for label, lf in sorted(facts.labels.items()):
        vars_text = ", ".join(f"{x}={_describe_text(domain, v)}" for x, v in sorted(lf.vars.items()))
        rows.append((str(label), str(lf.configs), str(len(lf.worlds)), vars_text))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = ["  ".join(r[i].rjust(widths[i]) for i in range(3)) + "  " + r[3] for r in rows]
    lines.append("")
    lines.append(f"result: {_describe_text(domain, facts.halt_values)}")
    for key in sorted(meta):
        if key != "config":
            lines.append(f"{key}: {_canonical(meta[key])}")
    lines.append("config: " + ", ".join(f"{k}={v}" for k, v in sorted(meta["config"].items())))
    return "\n".join(lines)


# -- running ------------------------------------------------------------------


def run(cfg: Config, text: str) -> tuple[Facts, Domain, dict, bool]:
    """Analyse (or execute) a program; returns facts, their domain, metadata and exhaustion."""
    e0 = parse_program(text)
    if cfg.concrete:
        if cfg.input is None and uses_input(e0):
            raise UsageError("this program reads `input`; pass --input with --concrete")
        collected = collect(e0, cfg.input, cfg.gc, cfg.fuel, oracle_clock(cfg))
        facts = oracle_facts(collected.states, cfg.input)
        meta = {"config": cfg.describe(), "steps": collected.steps, "sigma_size": len(collected.states)}
        return facts, ConcreteDomain(cfg.input), meta, collected.exhausted
    result = run_fixpoint(e0, cfg)
    facts = report(result)
    meta = {
        "config": cfg.describe(),
        "iterations": result.iterations,
        "sigma_size": len(result.configurations()),
    }
    return facts, make_value_domain(cfg), meta, result.exhausted


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        cfg = config_from_args(args)
        with open(args.program, encoding="utf-8") as fh:
            text = fh.read()
        facts, domain, meta, exhausted = run(cfg, text)
    except UsageError as err:
        print(f"analyzer: {err}", file=sys.stderr)
        build_parser().print_usage(sys.stderr)
        return EXIT_USAGE
    except ParseError as err:
        print(f"analyzer: {args.program}:{err}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as err:
        print(f"analyzer: {err}", file=sys.stderr)
        return EXIT_USAGE
    render = render_json if args.format == "json" else render_text
    print(render(facts, domain, meta))
    if exhausted:
        print(f"analyzer: fuel exhausted after {args.fuel} steps; the report is partial", file=sys.stderr)
        return EXIT_FUEL
    return EXIT_OK
