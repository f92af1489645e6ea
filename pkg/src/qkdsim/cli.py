"""Command-line front end.

Commands:
  qkd scenario {1|2|3} --out PATH   preset source comparisons as CSV
  qkd rate-curve --out PATH         one rate-vs-distance curve as CSV
  qkd simulate --seed N --out PATH  one seeded protocol session report
  qkd load-budget                   computational load table

Exit codes: 0 success, 2 config error, 3 constraint violation,
4 QBER abort, 5 equivalence failure.

Every output artifact starts with a run manifest (commented header)
recording the command, config, seed, and config digest; re-running the
same command reproduces the file byte-identically.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

from .loadmodel import (computation_rate, computational_load,
                        default_n2_total)
from .optimize import default_distance_grid, rate_curve
from .params import (ConfigError, Scenario, SourceKind, SourceSpec,
                     SystemConfig, load_config, validate)
from .photonics import expected_sift_stats
from .protocol import QBERAbortError, dump_transcript, run_session
from .secrecy import ConstraintError, LeakageModel

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONSTRAINT = 3
EXIT_QBER_ABORT = 4
EXIT_EQUIVALENCE = 5

CSV_HEADER = "L_km,alpha,system,prf_hz,mu,S,R_bps"

_SCENARIO_FLAGS = {"intact": Scenario.ATTENUATION_INTACT,
                   "eliminated": Scenario.ATTENUATION_ELIMINATED}


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    if abs(x) < 1e-3:
        return f"{x:.6e}"
    return f"{x:.6g}"


def _manifest_lines(command: str, config_path: str | None, seed,
                    output_path: str | None, scenario: str,
                    digest: str) -> list[str]:
    return [
        "# qkdsim run manifest",
        f"# command = {command}",
        f"# config = {config_path or '(defaults)'}",
        f"# seed = {seed if seed is not None else '-'}",
        f"# output = {output_path or '-'}",
        f"# scenario = {scenario}",
        f"# config_digest = {digest}",
    ]


def _load(args) -> SystemConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return SystemConfig()


def _with_source(config: SystemConfig, kind: SourceKind,
                 tau: float) -> SystemConfig:
    return replace(config, source=SourceSpec(
        kind=kind, mu=config.source.mu if kind is SourceKind.WEAK_COHERENT
        else 0.0, pulse_period_tau=tau))


def _curve_rows(label: str, config: SystemConfig, scenario: Scenario,
                distances, model: LeakageModel) -> list[str]:
    prf = 1.0 / config.source.pulse_period_tau
    curve = rate_curve(config, scenario, distances, model)
    rows = []
    for p in curve.points:
        rows.append(",".join([
            _fmt(p.L_km), _fmt(p.alpha), label, _fmt(prf),
            _fmt(p.mu), _fmt(p.S), _fmt(p.R)]))
    return rows


def cmd_scenario(args) -> int:
    config = _load(args)
    scenario_id = args.id
    distances = default_distance_grid(args.max_km, args.step)
    model = LeakageModel()

    if scenario_id in (1, 2):
        attack = (Scenario.ATTENUATION_INTACT if scenario_id == 1
                  else Scenario.ATTENUATION_ELIMINATED)
        systems = [
            ("SPS-1MHz", _with_source(config, SourceKind.SINGLE_PHOTON, 1e-6)),
            ("WCS-1MHz", _with_source(config, SourceKind.WEAK_COHERENT, 1e-6)),
            ("SPS-5kHz", _with_source(config, SourceKind.SINGLE_PHOTON, 2e-4)),
        ]
        sys_scen = [(lbl, cfg, attack) for lbl, cfg in systems]
        scen_name = attack.value
    else:
        attack = Scenario.ATTENUATION_INTACT
        base = _with_source(config, SourceKind.SINGLE_PHOTON, 2e-4)
        sys_scen = [
            (f"SPS-5kHz-A{a}", replace(
                base, channel=replace(base.channel, attenuation_A=a)), attack)
            for a in (0.2, 0.3)]
        scen_name = attack.value

    lines = _manifest_lines(f"scenario {scenario_id}", args.config, None,
                            args.out, scen_name, config.digest())
    lines.append(CSV_HEADER)
    for label, cfg, scen in sys_scen:
        lines.extend(_curve_rows(label, cfg, scen, distances, model))
    _write(args.out, lines)
    return EXIT_OK


def cmd_rate_curve(args) -> int:
    config = _load(args)
    scenario = _SCENARIO_FLAGS[args.scenario]
    report = validate(config)
    check = report.constraint_for(scenario)
    if (not check.satisfied
            and config.source.kind is SourceKind.WEAK_COHERENT):
        print(f"constraint violated: y = {check.y:.4f} vs bound "
              f"{check.bound:.4f} for {scenario.value}", file=sys.stderr)
        return EXIT_CONSTRAINT
    distances = default_distance_grid(args.max_km, args.step)
    label = ("WCS" if config.source.kind is SourceKind.WEAK_COHERENT
             else "SPS")
    lines = _manifest_lines("rate-curve", args.config, None, args.out,
                            scenario.value, config.digest())
    lines.append(CSV_HEADER)
    lines.extend(_curve_rows(label, config, scenario, distances,
                             LeakageModel()))
    _write(args.out, lines)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load(args)
    scenario = _SCENARIO_FLAGS[args.scenario]
    lines = _manifest_lines("simulate", args.config, args.seed, args.out,
                            scenario.value, config.digest())
    try:
        report = run_session(config, scenario, LeakageModel(), args.seed)
    except QBERAbortError as exc:
        lines += [
            "status = qber-abort",
            f"qber_observed = {_fmt(exc.qber_observed)}",
            f"qber_threshold = {_fmt(exc.threshold)}",
        ]
        _write(args.out, lines)
        return EXIT_QBER_ABORT

    led = report.ledger
    lines += [
        "status = " + ("ok" if report.equivalence_passed
                       else "equivalence-failure"),
        f"sifted_n = {report.sifted_n}",
        f"qber_observed = {_fmt(report.qber_observed)}",
        f"errors_injected = {report.errors_injected}",
        f"errors_corrected = {report.errors_corrected}",
        f"equivalence_passed = {report.equivalence_passed}",
        f"final_key_bits = {report.final_key_alice.size}",
        f"parity_bits_disclosed = {led.parity_bits_disclosed}",
        f"auth_bits_spent = {led.auth_bits_spent_a}",
        f"sift_bits_bob_to_alice = {led.sift_bits_bob_to_alice}",
        f"sift_bits_alice_to_bob = {led.sift_bits_alice_to_bob}",
        f"validation_passes = {led.validation_passes}",
        f"validation_failures = {led.validation_failures}",
        f"budget_raw_length = {_fmt(report.budget.raw_length)}",
    ]
    _write(args.out, lines)
    if args.transcript:
        with open(args.transcript, "w", encoding="utf-8") as fh:
            dump_transcript(report, fh)
    return EXIT_OK if report.equivalence_passed else EXIT_EQUIVALENCE


def cmd_load_budget(args) -> int:
    config = _load(args)
    stats = expected_sift_stats(config)
    n = int(round(stats.expected_sifted_n))
    e0 = stats.expected_errors_eT
    n2_total = default_n2_total(config.security)
    load = computational_load(config.block, config.security, n, e0, n2_total)
    tau = config.source.pulse_period_tau
    rate = computation_rate(load, config.block.raw_block_m, tau)
    lines = _manifest_lines("load-budget", args.config, None, None,
                            "-", config.digest())
    lines += [
        f"n_sifted = {n}",
        f"e0_expected = {_fmt(e0)}",
        f"N1_iterations = {load.N1}",
        f"N2_total = {load.N2_total}",
        f"overhead_LB0_ops = {_fmt(load.overhead_LB0)}",
        f"sifting_term_ops = {_fmt(load.sifting_term)}",
        f"ec_bracket_term_ops = {_fmt(load.ec_bracket_term)}",
        f"quadratic_term_ops = {_fmt(load.quadratic_term)}",
        f"total_LB_ops = {_fmt(load.total_LB)}",
        f"computation_rate_ops_per_s = {_fmt(rate)}",
    ]
    print("\n".join(lines))
    return EXIT_OK


def _write(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkd",
        description="BB84 post-processing: rate curves, protocol "
                    "simulation, and load budgets")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add_common(p, out_required=True):
        p.add_argument("--config", help="config file (defaults if omitted)")
        if out_required:
            p.add_argument("--out", help="output path (stdout if omitted)")

    p = sub.add_parser("scenario", help="preset source-comparison curves")
    p.add_argument("id", type=int, choices=(1, 2, 3))
    add_common(p)
    p.add_argument("--step", type=float, default=0.5, help="km per point")
    p.add_argument("--max-km", type=float, default=60.0)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("rate-curve", help="curve for the config as given")
    add_common(p)
    p.add_argument("--scenario", choices=sorted(_SCENARIO_FLAGS),
                   default="intact")
    p.add_argument("--step", type=float, default=0.5)
    p.add_argument("--max-km", type=float, default=60.0)
    p.set_defaults(func=cmd_rate_curve)

    p = sub.add_parser("simulate", help="one seeded protocol session")
    add_common(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scenario", choices=sorted(_SCENARIO_FLAGS),
                   default="intact")
    p.add_argument("--transcript", help="audit transcript path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("load-budget", help="computational load table")
    add_common(p, out_required=False)
    p.set_defaults(func=cmd_load_budget)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConstraintError as exc:
        print(f"constraint violation: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
