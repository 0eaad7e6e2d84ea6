"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numeric failure (a self-check
target missed its tolerance or the Fock cutoff could not be certified).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, CutoffError, DomainError, NotFoundError, SizingError
from .report import (
    BUILTIN_SCENARIOS,
    Scenario,
    emit_repetition_table,
    rows_to_csv,
    rows_to_json,
    run_scenario,
    run_sweep,
    sweep_csv,
    target_breaches,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3

log = logging.getLogger("macrocert")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario JSON file; overrides the subcommand flags")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=None, help="seed for randomised checks (unsigned 64-bit)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macrocert", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("photon", help="two-branch photon state against a coherent RF")
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--mean-photon", type=float, default=100.0)
    _common(p)

    p = sub.add_parser("spin", help="two-branch spin state against a spin-coherent RF")
    p.add_argument("--N", type=float, default=10)
    p.add_argument("--M", type=int)
    p.add_argument("--exponent", type=float)
    p.add_argument("--particle-mass", type=float)
    _common(p)

    p = sub.add_parser("position", help="delocalised mass against a centre-of-mass RF")
    for name in ("--m", "--m0", "--sigma0"):
        p.add_argument(name, type=float, required=False)
    for name in ("--L", "--K", "--exponent"):
        p.add_argument(name, type=float)
    _common(p)

    p = sub.add_parser("jc", help="laser-driven spin measurement fidelity")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--mean-photon", type=float, default=400.0)
    _common(p)

    p = sub.add_parser("general", help="general state against its dephased counterpart")
    p.add_argument("--N", type=int, help="two-branch state (|0> + |N>)/sqrt(2)")
    p.add_argument("--amplitudes", type=str, help="JSON list of amplitudes starting at --offset")
    p.add_argument("--offset", type=int)
    p.add_argument("--rf", type=str, help='JSON RF description, e.g. {"kind": "coherent", "mean_photon": 100}')
    p.add_argument("--beta", type=float, help="dephasing width exponent; required unless --random-instances")
    p.add_argument("--random-instances", type=int)
    _common(p)

    p = sub.add_parser("twocopy", help="two copies as mutual reference frames")
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--invariance-samples", type=int, default=0)
    _common(p)

    p = sub.add_parser("scenario", help="run a builtin scenario or a scenario file")
    p.add_argument("target", help=f"builtin name ({', '.join(BUILTIN_SCENARIOS)}) or path to JSON")
    p.add_argument("--print-config", action="store_true", help="emit the canonical config instead of running")
    _common(p)

    p = sub.add_parser("sweep", help="grid sweep to CSV")
    p.add_argument("case", help="photon, spin, position, scaling, jc, twocopy or repetitions")
    p.add_argument("--grid", help='JSON object of axis -> list, e.g. {"N": [1, 2], "mean_photon": [4, 100]}')
    _common(p)

    p = sub.add_parser("repetitions", help="repetitions needed for a target error probability")
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--p-err", type=float, default=0.05)
    _common(p)
    return parser


def _params_from_args(args) -> tuple[str, dict]:
    cmd = args.command
    if cmd == "photon":
        return cmd, {"N": args.N, "mean_photon": args.mean_photon}
    if cmd == "jc":
        return cmd, {"N": args.N, "mean_photon": args.mean_photon}
    if cmd == "twocopy":
        out = {"N": args.N}
        if args.invariance_samples:
            out["invariance_samples"] = args.invariance_samples
        return cmd, out
    if cmd == "spin":
        keys = {"N": args.N, "M": args.M, "exponent": args.exponent, "particle_mass": args.particle_mass}
    elif cmd == "position":
        keys = {"m": args.m, "m0": args.m0, "sigma0": args.sigma0, "L": args.L, "K": args.K,
                "exponent": args.exponent}
        for req in ("m", "m0", "sigma0"):
            if keys[req] is None:
                raise ConfigError("missing required flag", f"--{req}")
    else:
        keys = {"N": args.N, "offset": args.offset, "beta": args.beta, "random_instances": args.random_instances}
        for flag in ("amplitudes", "rf"):
            raw = getattr(args, flag)
            if raw is not None:
                try:
                    keys[flag] = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"invalid JSON: {exc}", f"--{flag}") from None
    return cmd, {k: v for k, v in keys.items() if v is not None}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output: {exc}", "--out") from None


def _scenario_for(args) -> Scenario:
    if args.config:
        scen = Scenario.load(args.config)
    elif args.command == "scenario":
        if args.target in BUILTIN_SCENARIOS:
            scen = BUILTIN_SCENARIOS[args.target]
        elif Path(args.target).exists():
            scen = Scenario.load(args.target)
        else:
            raise NotFoundError(f"no builtin scenario or file named {args.target!r}")
    else:
        case, params = _params_from_args(args)
        scen = Scenario(f"cli-{case}", case, params)
    if args.seed is not None:
        scen = Scenario(scen.name, scen.case, scen.parameters, scen.output_targets, args.seed)
    return scen


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "sweep":
            if args.config:
                spec = json.loads(Path(args.config).read_text())
                case, grid = spec.get("case", args.case), spec.get("grid", {})
            else:
                case, grid = args.case, json.loads(args.grid) if args.grid else {}
            if args.out:
                run_sweep(case, grid, args.out)
            else:
                sys.stdout.write(sweep_csv(case, grid))
            return EXIT_OK
        if args.command == "repetitions":
            rows = emit_repetition_table(args.t, args.p_err)
            _emit(rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows), args.out)
            return EXIT_OK
        scen = _scenario_for(args)
        if args.command == "scenario" and args.print_config:
            _emit(scen.to_json(), args.out)
            return EXIT_OK
        rows = run_scenario(scen)
        _emit(rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows), args.out)
        bad = target_breaches(scen, rows)
        for r in bad:
            log.error("%s: %s = %s misses expected %s", scen.name, r.quantity, r.value, r.expected)
        return EXIT_NUMERIC if bad else EXIT_OK
    except CutoffError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (ConfigError, DomainError, SizingError, NotFoundError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
