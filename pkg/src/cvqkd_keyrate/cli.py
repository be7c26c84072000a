"""Command-line front end.

Exit codes: 0 success, 2 input/validation error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .channel import (
    ChannelParams,
    estimate_stats,
    read_samples,
    reconstruct_pre_channel,
    simulate_samples,
    transform_stats,
    write_samples,
)
from .config import Grid, load_scenario
from .errors import InvalidParameter, NumericalFailure, ValidationError
from .keyrate import KeyRateReport, ProtocolConfig, key_rate
from .purifier import purify, shrink_to_physical
from .state import build_equivalent_state
from .sweep import (
    FIG2_EPSILON,
    FIG2_GRID,
    FIG2_VARIANTS,
    PANELS,
    fig2_protocol,
    fig2_stats,
    format_number,
    rows_to_csv,
    sweep,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

REPORT_COLUMNS = (
    "eta", "epsilon", "I_AB", "S_E", "S_E_given_B", "chi_BE", "key_rate", "V1", "V2", "s1", "s2", "T1", "T2",
)


class OutputError(Exception):
    pass


def _overrides(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise InvalidParameter(f"override must be KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _write_text(path, text: str, stdout):
    if path is None:
        stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _report_csv(report: KeyRateReport) -> str:
    p = report.purification
    values = (
        report.channel.eta, report.channel.epsilon, report.I_AB, report.S_E, report.S_E_given_B,
        report.chi_BE, report.K, p.V1, p.V2, p.s1, p.s2, p.T1, p.T2,
    )
    return ",".join(REPORT_COLUMNS) + "\n" + ",".join(format_number(v) for v in values) + "\n"


def cmd_keyrate(args, stdout) -> int:
    scenario = load_scenario(args.config, _overrides(args.set))
    report = key_rate(scenario.stats, scenario.channel, scenario.protocol)
    stdout.write(_report_csv(report))
    return EXIT_OK


def cmd_sweep(args, stdout) -> int:
    scenario = load_scenario(args.config, _overrides(args.set))
    if scenario.grid is None:
        raise InvalidParameter("missing required key(s): grid_start_db, grid_stop_db, grid_step_db")
    rows = sweep(scenario.stats, scenario.protocol, scenario.epsilon, scenario.grid.points())
    _write_text(args.out, rows_to_csv(rows), stdout)
    return EXIT_OK


def cmd_figure2(args, stdout) -> int:
    grid = Grid(args.start_db, args.stop_db, args.step_db)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc}") from exc
    panels = PANELS if args.panel == "both" else (args.panel,)
    for panel in panels:
        for variant in FIG2_VARIANTS:
            rows = sweep(fig2_stats(variant), fig2_protocol(panel), args.epsilon, grid.points())
            path = out / f"{panel}_{variant}.csv"
            _write_text(path, rows_to_csv(rows), stdout)
            stdout.write(f"wrote {path}\n")
    return EXIT_OK


def cmd_purify(args, stdout) -> int:
    scenario = load_scenario(args.config, _overrides(args.set))
    purified = purify(build_equivalent_state(scenario.stats))
    p = purified.params
    lines = [
        f"V1 = {p.V1:.9f}",
        f"V2 = {p.V2:.9f}",
        f"s1 = {p.s1:.9f}",
        f"s2 = {p.s2:.9f}",
        f"T1 = {format_number(p.T1)}",
        f"T2 = {format_number(p.T2)}",
        f"purity_residual = {purified.purity_residual():.3e}",
    ]
    stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_estimate(args, stdout) -> int:
    try:
        records = read_samples(args.samples, args.protocol)
    except OSError as exc:
        raise OutputError(f"cannot read {args.samples}: {exc}") from exc
    post = estimate_stats(records, args.protocol)
    ch = ChannelParams(args.eta, args.epsilon)
    pre = reconstruct_pre_channel(post, ch)
    scale = 1.0
    if not args.strict:
        pre, scale = shrink_to_physical(pre)
    quadrature = args.quadrature if args.protocol == "homodyne" else None
    cfg = ProtocolConfig(args.protocol, quadrature, args.log_base, args.beta)
    report = key_rate(pre, ch, cfg)

    lines = ["# post-channel statistics"]
    lines += [f"{k} = {format_number(getattr(post, k))}" for k in
              ("V_M_x", "V_M_p", "V_Bp_x", "V_Bp_p", "C_MBp_x", "C_MBp_p")]
    lines.append("# reconstructed pre-channel statistics")
    lines += [f"{k} = {format_number(getattr(pre, k))}" for k in
              ("V_M_x", "V_M_p", "V_B_x", "V_B_p", "C_MB_x", "C_MB_p")]
    lines.append(f"correlation_scale = {format_number(scale)}")
    lines.append("# key rate")
    stdout.write("\n".join(lines) + "\n" + _report_csv(report))
    return EXIT_OK


def cmd_synth(args, stdout) -> int:
    scenario = load_scenario(args.config, _overrides(args.set))
    post = transform_stats(scenario.stats, scenario.channel)
    records = simulate_samples(post, args.protocol, args.samples, args.seed)
    if args.out is None:
        write_samples(records, args.protocol, stdout)
        return EXIT_OK
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_samples(records, args.protocol, fh)
    except OSError as exc:
        raise OutputError(f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvqkd-keyrate",
        description="Asymptotic key rates for coherent-state CV QKD with asymmetric preparation statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_text, func):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario file (key = value)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.set_defaults(func=func)
        return p

    scenario_cmd("keyrate", "key rate for a single channel (config key 'eta')", cmd_keyrate)
    p = scenario_cmd("sweep", "key rate over an attenuation grid", cmd_sweep)
    p.add_argument("--out", help="output CSV (default: stdout)")
    scenario_cmd("purify", "print the purification network parameters", cmd_purify)

    p = sub.add_parser("figure2", help="asymmetric preparation-noise curves, four CSVs per panel")
    p.add_argument("--panel", choices=PANELS + ("both",), default="both")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--epsilon", type=float, default=FIG2_EPSILON)
    p.add_argument("--start-db", type=float, default=FIG2_GRID[0])
    p.add_argument("--stop-db", type=float, default=FIG2_GRID[1])
    p.add_argument("--step-db", type=float, default=FIG2_GRID[2])
    p.set_defaults(func=cmd_figure2)

    p = sub.add_parser("estimate", help="estimate statistics from a sample CSV and evaluate the key rate")
    p.add_argument("samples", help="sample CSV file")
    p.add_argument("--protocol", choices=("homodyne", "heterodyne"), required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--quadrature", choices=("x", "p"), default="x")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--log-base", default="2")
    p.add_argument("--strict", action="store_true",
                   help="reject unphysical estimates instead of shrinking the correlations onto the physical set")
    p.set_defaults(func=cmd_estimate)

    p = scenario_cmd("synth", "write synthetic sample records for a scenario (config key 'eta')", cmd_synth)
    p.add_argument("--protocol", choices=("homodyne", "heterodyne"), required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default: stdout)")
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, stdout)
    except ValidationError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT
    except NumericalFailure as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except OutputError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
