"""Command line entry point: ``foliage verify | report | list``.

Exit codes: 0 when every check passes or is not applicable, 1 when some
check fails, 2 for usage errors such as an unknown example or suite.
"""

from __future__ import annotations

import argparse
import json
import sys

from .gallery import NAMES, catalogue
from .report import SUITES, RunConfig, Tolerances, markdown_from_json, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _names(value: str, known, what: str) -> tuple:
    if value == "all":
        return tuple(known)
    names = tuple(v.strip() for v in value.split(",") if v.strip())
    bad = [n for n in names if n not in known]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown {what}: {', '.join(bad) or value!r}; "
                                         f"choose from {', '.join(known)} or 'all'")
    return names


def _positive_float(value: str) -> float:
    try:
        x = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def _resolution(value: str) -> int:
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if k < 2:
        raise argparse.ArgumentTypeError("resolution must be at least 2")
    return k


def _seed(value: str) -> int:
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if not 0 <= k < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return k


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="foliage", description="Verify transverse geometry identities on the example gallery.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (("verify", "run verification suites and report every check"),
                            ("report", "dimension table per example plus the checks")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--examples", default="all", type=lambda v: _names(v, NAMES, "example"),
                       help="comma-separated example names or 'all'")
        p.add_argument("--suite", default="all", type=lambda v: _names(v, SUITES, "suite"),
                       help=f"one of {', '.join(SUITES)}, a comma-separated list, or 'all'")
        p.add_argument("--format", choices=("json", "markdown"), default="json")
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--resolution", type=_resolution, default=None,
                       help="quadrature points per axis (default: per example, 32)")
        p.add_argument("--tol-struct", type=_positive_float, default=Tolerances.struct,
                       help="tolerance of exact structural identities")
        p.add_argument("--tol-sampled", type=_positive_float, default=Tolerances.sampled,
                       help="tolerance of sampled invariance statements")
        p.add_argument("--out", default=None, help="write the document here instead of stdout")
    p = sub.add_parser("list", help="catalogue of examples with expected values")
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("--out", default=None)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _catalogue_markdown(items) -> str:
    lines = ["# Example gallery", ""]
    for item in items:
        lines += [f"## {item['name']}", "", item["description"], "",
                  f"dimension {item['dim']}, leaf rank {item['rank']}, codimension {item['codim']}, "
                  f"harmonic: {item['harmonic']}", ""]
        if item["flags"]:
            lines += [f"flags: {', '.join(item['flags'])}", ""]
        lines += ["| quantity | value | origin | oracle |", "|---|---|---|---|"]
        for key, e in item["expected"].items():
            lines.append(f"| {key} | {e['value']} | {e['origin']} | {e['oracle']} |")
        lines.append("")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list":
        items = catalogue()
        text = (json.dumps({"examples": items}, indent=2, sort_keys=True) + "\n" if args.format == "json"
                else _catalogue_markdown(items))
        _emit(text, args.out)
        return EXIT_OK
    config = RunConfig(examples=args.examples, suites=args.suite, seed=args.seed, resolution=args.resolution,
                       tolerances=Tolerances(struct=args.tol_struct, sampled=args.tol_sampled))
    rep = run(config, tables=args.command == "report")
    data = rep.to_dict()
    text = rep.to_json() if args.format == "json" else markdown_from_json(data)
    _emit(text, args.out)
    counts = rep.counts
    print(f"pass {counts['pass']}, fail {counts['fail']}, not-applicable {counts['not-applicable']}",
          file=sys.stderr)
    return EXIT_FAIL if rep.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
