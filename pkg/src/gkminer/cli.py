"""``gkminer`` command line: mine, validate, link, stats, synth."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__
from .errors import InvariantError, ParseError, UnknownTypeError
from .graph import FORMATS, graph_from_text, guess_format, load_graph
from .keyfile import dumps_keys, load_keys, parse_fraction, validate_keys
from .linker import evaluate_links, link_entities, links_tsv, load_gold, pair_names
from .miner import Miner
from .summary import build_summary
from .synth import SynthSpec, fixture_text, generate

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INVARIANT = 0, 1, 2, 3

log = logging.getLogger("gkminer")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _threshold(text: str):
    try:
        value = parse_fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"support must be in (0, 1], got {text}")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _override(parse):
    def inner(text: str):
        if "=" not in text:
            raise argparse.ArgumentTypeError(f"expected TYPE=VALUE, got {text!r}")
        t, value = text.split("=", 1)
        return t, parse(value)
    return inner


def _load(path, fmt):
    t0 = time.perf_counter()
    g = load_graph(path, fmt)
    return g, time.perf_counter() - t0


def cmd_mine(args) -> int:
    t_start = time.perf_counter()
    g, t_load = _load(args.graph, args.format)
    overrides: dict = {}
    for t, k in args.type_k or []:
        overrides[t] = (k, overrides.get(t, (None, None))[1])
    for t, d in args.type_sup or []:
        overrides[t] = (overrides.get(t, (None, None))[0], d)
    miner = Miner(g, args.k, args.sup, optimize=not args.no_opt, threads=args.threads,
                  max_level=args.max_level, overrides=overrides)
    store = miner.mine(args.type)
    store.check_invariants(args.k if not overrides else None)
    write_atomic(args.out, dumps_keys(store, args.type))
    timings = {"load": t_load, **miner.timings, "total": time.perf_counter() - t_start}
    summary = {
        "command": "mine", "type": args.type, "k": args.k,
        "sup": f"{args.sup.numerator}/{args.sup.denominator}", "optimized": not args.no_opt,
        "keys": {t: len(store.keys_of(t)) for t in store.mined_types()},
        "dependencies": [list(e) for e in store.dependencies.edges],
        "cycleBreaks": [list(e) for e in store.cycle_breaks],
        "stats": vars(miner.stats),
        "timings": {k: round(v, 6) for k, v in timings.items()},
    }
    print(json.dumps(summary))
    return EXIT_OK


def cmd_validate(args) -> int:
    g, _ = _load(args.graph, args.format)
    report = validate_keys(g, load_keys(args.keys), args.max_violations)
    _emit(args, json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    return EXIT_OK


def cmd_link(args) -> int:
    left, _ = _load(args.left, args.format)
    right, _ = _load(args.right, args.format)
    pairs = link_entities(left, right, load_keys(args.keys), args.type)
    write_atomic(args.out, links_tsv(pairs, left, right))
    result = {"command": "link", "type": args.type, "links": len(pairs)}
    if args.gold:
        result["score"] = evaluate_links(pair_names(pairs, left, right), load_gold(args.gold)).to_json()
    print(json.dumps(result))
    return EXIT_OK


def cmd_stats(args) -> int:
    g, _ = _load(args.graph, args.format)
    summary, _ = build_summary(g, with_uniqueness=False)
    _emit(args, json.dumps(summary.to_json(), indent=2, ensure_ascii=False) + "\n")
    return EXIT_OK


def cmd_synth(args) -> int:
    if bool(args.spec) == bool(args.fixture):
        raise UsageError("synth: give exactly one of --spec or --fixture")
    if args.fixture:
        g = graph_from_text(fixture_text(args.fixture))
    else:
        spec = SynthSpec.load(args.spec)
        if args.seed is not None:
            spec.seed = args.seed
        g = generate(spec)
    if guess_format(args.out) == "tsv":
        text = g.to_tsv()
    else:
        # fixtures are written verbatim, comments included
        text = fixture_text(args.fixture) if args.fixture else g.to_ntriples()
    write_atomic(args.out, text)
    print(json.dumps({"command": "synth", "nodes": g.num_nodes, "edges": g.num_edges,
                      "types": {t: len(g.entities_of_type(t)) for t in g.types}}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gkminer", description="Mine and apply graph keys.")
    p.add_argument("--version", action="version", version=f"gkminer {__version__}")
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def graph_args(sp, name="--graph"):
        sp.add_argument(name, required=True)

    m = sub.add_parser("mine", help="mine minimal k-bounded keys for a type")
    graph_args(m)
    m.add_argument("--format", choices=FORMATS)
    m.add_argument("--type", required=True)
    m.add_argument("--k", type=_positive, required=True)
    m.add_argument("--sup", type=_threshold, required=True, help="decimal or p/q")
    m.add_argument("--out", required=True)
    m.add_argument("--no-opt", action="store_true", help="disable the uniqueness shortcut")
    m.add_argument("--threads", type=_positive, default=1)
    m.add_argument("--max-level", type=_positive)
    m.add_argument("--type-k", action="append", type=_override(_positive), metavar="TYPE=K")
    m.add_argument("--type-sup", action="append", type=_override(_threshold), metavar="TYPE=SUP")
    m.set_defaults(func=cmd_mine)

    v = sub.add_parser("validate", help="check keys against a graph")
    graph_args(v)
    v.add_argument("--format", choices=FORMATS)
    v.add_argument("--keys", required=True)
    v.add_argument("--max-violations", type=_positive, default=100)
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    l = sub.add_parser("link", help="link entities of two graphs")
    graph_args(l, "--left")
    graph_args(l, "--right")
    l.add_argument("--format", choices=FORMATS)
    l.add_argument("--keys", required=True)
    l.add_argument("--type", required=True)
    l.add_argument("--gold")
    l.add_argument("--out", required=True)
    l.set_defaults(func=cmd_link)

    s = sub.add_parser("stats", help="print the summary graph as JSON")
    graph_args(s)
    s.add_argument("--format", choices=FORMATS)
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    y = sub.add_parser("synth", help="write a synthetic graph or a fixture")
    y.add_argument("--spec")
    y.add_argument("--fixture")
    y.add_argument("--seed", type=int)
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_synth)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, UnknownTypeError) as exc:
        print(f"gkminer: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, json.JSONDecodeError) as exc:
        print(f"gkminer: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantError as exc:
        print(f"gkminer: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, FileNotFoundError) as exc:
        print(f"gkminer: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
