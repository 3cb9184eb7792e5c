"""Command-line interface: ``cnlm run|sweep|compare|levels``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .converter import ConverterConfig, distinct_levels
from .metrics import metrics_summary, write_metrics_json
from .scenario import ScenarioError, bundled_scenarios, load_scenario
from .simulate import simulate
from .sweep import DEFAULT_ALPHAS, DEFAULT_BETAS, SweepSpec, run_sweep, write_sweep_csv

EXIT_RUNTIME = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _fmt_ns(value_s):
    return "none" if value_s is None else f"{value_s * 1e9:,.0f} ns"


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    trace = simulate(sc.converter, sc.penalty, sc.reference, sc.load, args.fine_samples_per_step)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = metrics_summary(trace.stats, trace.distortion)
    summary["label"] = sc.label
    trace.waveform.to_csv(out / f"{sc.name}.waveform.csv")
    trace.stats.to_scatter_csv(out / f"{sc.name}.scatter.csv")
    write_metrics_json(summary, out / f"{sc.name}.metrics.json")
    print(f"{sc.label}: total distortion {summary['total_distortion_pct']:.2f} %, "
          f"avg switching rate {summary['avg_switching_rate_hz'] / 1e3:.1f} kHz, "
          f"min interval {_fmt_ns(trace.stats.min_interval_s)}")
    print(f"wrote {out / sc.name}.{{waveform.csv,scatter.csv,metrics.json}}")
    return 0


def cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    spec = SweepSpec(sc, args.alpha, args.beta, args.fine_samples_per_step)
    cells = run_sweep(spec, workers=args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = Path(args.output) if args.output else out / f"{sc.name}.sweep.csv"
    write_sweep_csv(cells, path)
    print(f"wrote {len(cells)} rows to {path}")
    return 0


def compare_rows(scenarios, samples_per_step: int = 10) -> list[dict]:
    first = scenarios[0]
    for sc in scenarios[1:]:
        if sc.converter != first.converter or sc.reference != first.reference:
            raise ConfigError(
                f"scenario '{sc.name}' uses a different converter or reference than '{first.name}'"
            )
    rows = []
    for sc in scenarios:
        trace = simulate(sc.converter, sc.penalty, sc.reference, sc.load, samples_per_step)
        min_iv = trace.stats.min_interval_s
        rows.append({
            "scenario": sc.name,
            "method": sc.label,
            "min_switching_interval_ns": None if min_iv is None else min_iv * 1e9,
            "avg_switching_rate_khz": trace.stats.avg_rate_hz / 1e3,
            "total_distortion_pct": trace.distortion.total_distortion_pct,
        })
    return rows


def format_table(rows) -> str:
    head = ("Modulation Method", "Minimum Switching Interval", "Average Switching Rate",
            "Voltage Total Distortion")
    body = [
        (r["method"],
         "none" if r["min_switching_interval_ns"] is None else f"{r['min_switching_interval_ns']:,.0f} ns",
         f"{r['avg_switching_rate_khz']:.1f} kHz",
         f"{r['total_distortion_pct']:.1f} %")
        for r in rows
    ]
    widths = [max(len(x[i]) for x in (head, *body)) for i in range(4)]
    line = "-+-".join("-" * w for w in widths)
    fmt = lambda cells: " | ".join(c.ljust(w) if i == 0 else c.rjust(w)
                                   for i, (c, w) in enumerate(zip(cells, widths)))
    return "\n".join([fmt(head), line, *(fmt(b) for b in body)])


def cmd_compare(args) -> int:
    if len(args.scenarios) < 2:
        raise ConfigError("compare needs at least two scenarios")
    scenarios = [load_scenario(s) for s in args.scenarios]
    rows = compare_rows(scenarios, args.fine_samples_per_step)
    print(format_table(rows))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = Path(args.json) if args.json else out / "comparison.json"
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_levels(args) -> int:
    if args.voltages:
        cfg = ConverterConfig(tuple(args.voltages))
    elif args.scenario:
        cfg = load_scenario(args.scenario).converter
    else:
        raise ConfigError("levels needs a scenario or --voltages")
    levels = distinct_levels(cfg)
    if args.json:
        print(json.dumps(levels))
    else:
        print(f"{len(levels)} distinct levels (3**{cfg.n_modules} = {3 ** cfg.n_modules} states)")
        for v in levels:
            print(f"{v:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=argparse.SUPPRESS,
                        help="directory for output artifacts (default: current directory)")
    common.add_argument("--fine-samples-per-step", type=int, default=argparse.SUPPRESS,
                        help="fine waveform samples per control step (default: 10)")

    parser = argparse.ArgumentParser(
        prog="cnlm", parents=[common],
        description="Nearest-level and conditional nearest-level modulation of multilevel converters.",
        epilog="bundled scenarios: " + ", ".join(bundled_scenarios()),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="simulate one scenario")
    p.add_argument("scenario", help="scenario file or bundled scenario name")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="alpha/beta grid over a scenario")
    p.add_argument("scenario")
    p.add_argument("--alpha", type=_float_list, default=list(DEFAULT_ALPHAS))
    p.add_argument("--beta", type=_float_list, default=list(DEFAULT_BETAS))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", help="CSV path (default: <out-dir>/<scenario>.sweep.csv)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", parents=[common], help="comparison table over scenarios")
    p.add_argument("scenarios", nargs="+")
    p.add_argument("--json", help="JSON path (default: <out-dir>/comparison.json)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("levels", parents=[common], help="print the distinct output levels")
    p.add_argument("scenario", nargs="?")
    p.add_argument("--voltages", type=_float_list)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_levels)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.out_dir = getattr(args, "out_dir", ".")
    args.fine_samples_per_step = getattr(args, "fine_samples_per_step", 10)
    try:
        return args.func(args)
    except (ScenarioError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
