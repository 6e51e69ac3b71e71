"""Command line front end: ``cmlsim run|sweep|baseline``."""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import reporting
from .config import ConfigError, from_document, load_config, set_path, to_document
from .data import DataError
from .sim import baseline_accuracy, run

logger = logging.getLogger("cmlsim")


def _parse_values(text: str) -> list:
    values = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            values.append(int(tok))
        except ValueError:
            try:
                values.append(float(tok))
            except ValueError:
                raise ConfigError(f"invalid sweep value {tok!r}") from None
    if not values:
        raise ConfigError("empty sweep value list")
    return values


def _value_tag(value) -> str:
    return str(value).replace("-", "m").replace(".", "p")


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        doc = to_document(config)
        doc["seed"] = args.seed
        config = from_document(doc)
    report = run(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reporting.write_report(report, out / "report.json", config=to_document(config))
    reporting.write_timeline(report, out / "timeline.csv")
    print(reporting.summary_line(report))
    return 0


def _sweep_point(doc):
    return run(from_document(doc))


def cmd_sweep(args) -> int:
    base = to_document(load_config(args.config))
    values = _parse_values(args.values)
    docs = [set_path(base, args.param, v) for v in values]
    configs = [from_document(d) for d in docs]  # validate every point before running any
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_sweep_point, docs))
    else:
        reports = [run(c) for c in configs]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, (value, report) in enumerate(zip(values, reports)):
        reporting.write_timeline(report, out / f"timeline_{i:03d}_{_value_tag(value)}.csv")
        rows.append(reporting.sweep_row(value, report))
        print(f"{args.param}={value} {reporting.summary_line(report)}")
    reporting.write_sweep(rows, out / "sweep.csv")
    return 0


def cmd_baseline(args) -> int:
    print(reporting.fmt(baseline_accuracy(load_config(args.config))))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmlsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="vary one parameter over a list of values")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="dotted path, e.g. contract.submission_cost")
    p.add_argument("--values", required=True, help="comma separated numbers")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseline", help="print accuracy_all for a scenario")
    p.add_argument("config")
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DataError, ValueError, OSError) as exc:
        print(f"cmlsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
