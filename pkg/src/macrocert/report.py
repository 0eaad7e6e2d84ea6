"""Scenario configs, report rows, sweeps and repetition tables."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from . import canonical_cases as cc
from . import constants
from .distinguish import chernoff_repetitions, helstrom_success
from .errors import ConfigError, DomainError, MacrocertError, NotFoundError
from .general_macro import (
    general_distance,
    random_instance,
    rf_variance_average,
    sine_scaling_curve,
    variance_bound,
)
from .jc_measurement import JCModel, average_fidelity_exact, avg_fidelity, fidelity_coefficient
from .number_states import NumberState, RFSpec, make_two_branch
from .two_copy_relative import (
    BRUTE_FORCE_MAX_N,
    brute_force_spin_two_copy,
    photon_two_copy_numeric,
    photon_two_copy_trace_distance,
    relative_dof_invariance_check,
    spin_two_copy_trace_distance,
)

CONFIG_VERSION = 1
MAX_SWEEP_POINTS = 1_000_000
CASES = ("photon", "spin", "position", "jc", "general", "twocopy")


# ---------------------------------------------------------------------------
# Rows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    """One reported quantity.  Infinite values are stored as ``value=None, unbounded=True``."""

    scenario: str
    quantity: str
    value: Optional[float]
    expected: Optional[float] = None
    deviation: Optional[float] = None
    note: str = ""
    unbounded: bool = False

    def __post_init__(self):
        if (self.expected is None) != (self.deviation is None):
            raise ValueError("deviation must be present exactly when expected is")

    @classmethod
    def make(cls, scenario: str, quantity: str, value: float, note: str = "",
             expected: Optional[float] = None) -> "ReportRow":
        value = float(value)
        if math.isinf(value):
            return cls(scenario, quantity, None, expected, math.inf if expected is not None else None,
                       note or "unbounded", True)
        dev = None
        if expected is not None:
            dev = abs(value - expected) / max(abs(expected), 1e-300)
        return cls(scenario, quantity, value, expected, dev, note)

    def to_dict(self) -> dict[str, Any]:
        dev = self.deviation
        return {
            "scenario": self.scenario,
            "quantity": self.quantity,
            "value": self.value,
            "expected": self.expected,
            "deviation": None if dev is None or math.isinf(dev) else dev,
            "unbounded": self.unbounded,
            "note": self.note,
        }


ROW_FIELDS = ("scenario", "quantity", "value", "expected", "deviation", "unbounded", "note")


def format_number(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return ""
        return "%.17g" % x
    return str(x)


def rows_to_csv(rows: Iterable[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(ROW_FIELDS)
    for r in rows:
        d = r.to_dict()
        w.writerow([format_number(d[k]) for k in ROW_FIELDS])
    return buf.getvalue()


def rows_to_json(rows: Iterable[ReportRow]) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# Scenario configs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutputTarget:
    quantity: str
    expected: float
    rel_tol: float

    def to_dict(self):
        return {"quantity": self.quantity, "expected": self.expected, "rel_tol": self.rel_tol}


def _as_int(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or int(v) != v:
        raise ConfigError("expected an integer", path)
    return int(v)


def _as_float(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError("expected a finite number", path)
    return float(v)


def _as_rf(v, path):
    if isinstance(v, RFSpec):
        return v.to_dict()
    try:
        return RFSpec.from_dict(v).to_dict()
    except (MacrocertError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from None


def _as_float_list(v, path):
    if not isinstance(v, list):
        raise ConfigError("expected a list of numbers", path)
    return [_as_float(x, f"{path}[{i}]") for i, x in enumerate(v)]


# field -> (coercer, required)
_SCHEMAS: dict[str, dict[str, tuple[Callable, bool]]] = {
    "photon": {"N": (_as_int, True), "mean_photon": (_as_float, True)},
    "spin": {"N": (_as_float, True), "M": (_as_int, False), "exponent": (_as_float, False),
             "particle_mass": (_as_float, False)},
    "position": {"m": (_as_float, True), "m0": (_as_float, True), "sigma0": (_as_float, True),
                 "L": (_as_float, False), "K": (_as_float, False), "exponent": (_as_float, False)},
    "jc": {"N": (_as_int, True), "mean_photon": (_as_float, True)},
    "general": {"N": (_as_int, False), "amplitudes": (_as_float_list, False), "offset": (_as_int, False),
                "rf": (_as_rf, False), "beta": (_as_float, False), "random_instances": (_as_int, False)},
    "twocopy": {"N": (_as_int, True), "invariance_samples": (_as_int, False)},
}


def _positive(params, key, path):
    if key in params and not params[key] > 0:
        raise ConfigError("must be positive", f"{path}.{key}")


def _validate_case(case: str, params: dict, path: str = "parameters") -> dict:
    schema = _SCHEMAS[case]
    if not isinstance(params, dict):
        raise ConfigError("expected an object", path)
    unknown = sorted(set(params) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}", f"{path}.{unknown[0]}")
    out = {}
    for key, (coerce, required) in schema.items():
        if key not in params:
            if required:
                raise ConfigError("missing required key", f"{path}.{key}")
            continue
        out[key] = coerce(params[key], f"{path}.{key}")
    for key in ("N", "mean_photon", "M", "exponent", "particle_mass", "m", "m0", "sigma0", "L", "K", "beta"):
        if key == "mean_photon" and case == "photon":
            if out[key] < 0:
                raise ConfigError("must be >= 0", f"{path}.{key}")
            continue
        _positive(out, key, path)
    if case == "position":
        given = [k for k in ("L", "K", "exponent") if k in out]
        if len(given) != 2:
            raise ConfigError("give exactly two of L, K, exponent", path)
    if case == "general":
        modes = [k for k in ("N", "amplitudes", "random_instances") if k in out]
        if len(modes) != 1:
            raise ConfigError("give exactly one of N, amplitudes, random_instances", path)
        if "random_instances" not in out:
            for key in ("rf", "beta"):
                if key not in out:
                    raise ConfigError("missing required key", f"{path}.{key}")
        if "offset" in out and "amplitudes" not in out:
            raise ConfigError("offset only applies with amplitudes", f"{path}.offset")
    return out


@dataclass(frozen=True)
class Scenario:
    name: str
    case: str
    parameters: dict
    output_targets: tuple[OutputTarget, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ConfigError("must be a non-empty string", "name")
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}", "case")
        object.__setattr__(self, "parameters", _validate_case(self.case, self.parameters))
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("must be an unsigned 64-bit integer", "seed")
        object.__setattr__(self, "output_targets", tuple(self.output_targets))

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": CONFIG_VERSION,
            "name": self.name,
            "case": self.case,
            "seed": self.seed,
            "parameters": self.parameters,
            "output_targets": [t.to_dict() for t in self.output_targets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: Any) -> "Scenario":
        if not isinstance(data, dict):
            raise ConfigError("a scenario must be a JSON object")
        allowed = {"version", "name", "case", "seed", "parameters", "output_targets"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigError(f"unknown key {unknown[0]!r}", unknown[0])
        if data.get("version") != CONFIG_VERSION:
            raise ConfigError(f"expected version {CONFIG_VERSION}", "version")
        for key in ("name", "case", "parameters"):
            if key not in data:
                raise ConfigError("missing required key", key)
        targets = []
        raw_targets = data.get("output_targets", [])
        if not isinstance(raw_targets, list):
            raise ConfigError("expected a list", "output_targets")
        for i, t in enumerate(raw_targets):
            p = f"output_targets[{i}]"
            if not isinstance(t, dict) or set(t) != {"quantity", "expected", "rel_tol"}:
                raise ConfigError("targets take exactly quantity, expected, rel_tol", p)
            if not isinstance(t["quantity"], str):
                raise ConfigError("expected a string", f"{p}.quantity")
            tol = _as_float(t["rel_tol"], f"{p}.rel_tol")
            if tol < 0:
                raise ConfigError("must be >= 0", f"{p}.rel_tol")
            targets.append(OutputTarget(t["quantity"], _as_float(t["expected"], f"{p}.expected"), tol))
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("must be an unsigned 64-bit integer", "seed")
        return cls(data["name"], data["case"], data["parameters"], tuple(targets), seed)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        return cls.from_json(text)


BUILTIN_SCENARIOS: dict[str, Scenario] = {
    "cat": Scenario(
        "cat", "spin",
        # about 3 kg of water; the RF size that keeps the exponent at 1/8 is N^2
        {"N": 1e26, "exponent": 0.125, "particle_mass": constants.WATER_MOLECULE_MASS_KG},
        (OutputTarget("rf_mass_earth_masses", 50.0, 0.2),),
    ),
    "molecule-1m": Scenario(
        "molecule-1m", "position",
        {"L": 1.0, "m": constants.WATER_MOLECULE_MASS_KG, "m0": constants.WATER_MOLECULE_MASS_KG,
         "sigma0": 1e-9, "exponent": 1.0},
        (OutputTarget("rf_mass_ug", 3.0, 0.5),),
    ),
    "gram-earth": Scenario(
        "gram-earth", "position",
        {"m": 1e-3, "m0": constants.WATER_MOLECULE_MASS_KG, "sigma0": 1e-9,
         "K": constants.EARTH_MASS_KG / constants.WATER_MOLECULE_MASS_KG, "exponent": 1.0},
        (OutputTarget("max_L_um", 1.0, 0.5),),
    ),
}


def builtin_scenario(name: str) -> Scenario:
    try:
        return BUILTIN_SCENARIOS[name]
    except KeyError:
        raise NotFoundError(f"no builtin scenario named {name!r}") from None


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def _photon(p):
    r = cc.photon_trace_distance(p["N"], p["mean_photon"])
    return [
        ("t_exact", r.exact, "shifted Poisson overlap"),
        ("t_asymptotic", r.asymptotic, "Gaussian limit"),
        ("t_erfc", r.refined, "Gaussian limit with lower-edge correction"),
        ("relative_gap", r.relative_gap, ""),
        ("success_probability", helstrom_success(r.exact), "1/2 + t/2"),
    ]


def _spin(p):
    N = p["N"]
    out = []
    if "M" in p:
        if N != int(N):
            raise ConfigError("must be an integer when M is given", "parameters.N")
        r = cc.spin_trace_distance(int(N), p["M"])
        out += [
            ("t_exact", r.exact, "shifted binomial overlap"),
            ("t_asymptotic_printed", r.asymptotic, "coefficient 1/8"),
            ("t_asymptotic_gaussian", r.refined, "coefficient 1/2 from binomial variance M/4"),
            ("relative_gap", r.relative_gap, "printed asymptotic vs exact"),
        ]
    if "exponent" in p:
        t_target = 0.5 * math.exp(-p["exponent"])
        M_req = cc.rf_size_for_target("spin", N, t_target)
        out.append(("required_rf_size", M_req, "spins needed for the target exponent"))
        if "particle_mass" in p:
            mass = M_req * p["particle_mass"]
            out.append(("rf_mass_kg", mass, ""))
            out.append(("rf_mass_earth_masses", mass / constants.EARTH_MASS_KG, ""))
    if not out:
        raise ConfigError("give M or exponent", "parameters")
    return out


def _position(p):
    m, m0, s0 = p["m"], p["m0"], p["sigma0"]
    if "L" in p and "K" in p:
        r = cc.position_trace_distance(p["L"], m, m0, s0, p["K"])
        return [
            ("t_quadrature", r.exact, "centre-of-mass overlap by quadrature"),
            ("t_analytic", r.asymptotic, ""),
            ("relative_gap", r.relative_gap, ""),
            ("exponent", cc.position_exponent(p["L"], m, m0, s0, p["K"]), ""),
        ]
    e = p["exponent"]
    if "L" in p:
        K = (p["L"] / s0) ** 2 * (m / m0) ** 2 / (8.0 * e)
        mass = K * m0
        return [
            ("required_K", K, "RF particles for the target exponent"),
            ("rf_mass_kg", mass, ""),
            ("rf_mass_ug", mass / constants.MICROGRAM_KG, ""),
        ]
    L = s0 * (m0 / m) * math.sqrt(8.0 * p["K"] * e)
    return [
        ("max_L_m", L, "largest separation at the target exponent"),
        ("max_L_um", L / constants.MICROMETRE_M, ""),
        ("max_L_times_m", L * m, "kg m"),
    ]


def _jc(p):
    N, mu = p["N"], p["mean_photon"]
    out = [
        ("fidelity_second_order", avg_fidelity(N, mu), ""),
        ("infidelity_coefficient", fidelity_coefficient(), "(4 + pi^2)/192"),
    ]
    model = JCModel(N, mu)
    if (model.fock_cutoff + N + 1) * (N + 1) ** 2 > 50_000_000:
        raise ConfigError("exact model too large", "parameters.mean_photon")
    F = average_fidelity_exact(model)
    out += [
        ("fidelity_exact", F, f"Fock cutoff {model.fock_cutoff}"),
        ("infidelity_times_mean_photon", (1.0 - F) * mu, ""),
    ]
    return out


def _general(p, seed):
    if "random_instances" in p:
        worst = math.inf
        rows = []
        for i in range(p["random_instances"]):
            inst = random_instance(seed + i)
            r = variance_bound(inst.rf, inst.beta, inst.N, state=inst.state)
            worst = min(worst, r.bound - r.exact)
        rows.append(("min_bound_margin", worst, f"seeds {seed}..{seed + p['random_instances'] - 1}"))
        return rows
    rf = RFSpec.from_dict(p["rf"])
    if "N" in p:
        state, _ = make_two_branch(0, p["N"])
        N = p["N"]
    else:
        state = NumberState.from_unnormalized(p.get("offset", 0), p["amplitudes"])
        N = max(1, len(state) - 1)
    sigma = float(N) ** p["beta"]
    d = general_distance(state, rf, sigma)
    var = rf_variance_average(rf)
    return [
        ("t_exact", d.exact, f"dephasing width N^beta = {sigma:.6g}"),
        ("convexity_bound", d.convexity_bound, "sum of component distances"),
        ("variance_bound", math.sqrt(var) / sigma, ""),
        ("rf_variance_avg", var, ""),
    ]


def _twocopy(p, seed):
    N = p["N"]
    out = [
        ("photon_t_closed_form", photon_two_copy_trace_distance(N), ""),
        ("photon_t_numeric", photon_two_copy_numeric(N), "twirl with one copy as reference"),
        ("spin_t_formula", spin_two_copy_trace_distance(N), "exact rational sector sum"),
    ]
    if N <= BRUTE_FORCE_MAX_N:
        out.append(("spin_t_brute_force", brute_force_spin_two_copy(N).trace_distance, f"{2 * N} qubits"))
    samples = p.get("invariance_samples", 0)
    if samples:
        rep = relative_dof_invariance_check(samples, seed)
        out.append(("invariance_max_deviation", rep.max_deviation, f"{samples} Haar rotations"))
    return out


def run_scenario(config: Scenario) -> list[ReportRow]:
    p = config.parameters
    try:
        if config.case == "photon":
            vals = _photon(p)
        elif config.case == "spin":
            vals = _spin(p)
        elif config.case == "position":
            vals = _position(p)
        elif config.case == "jc":
            vals = _jc(p)
        elif config.case == "general":
            vals = _general(p, config.seed)
        else:
            vals = _twocopy(p, config.seed)
    except ConfigError:
        raise
    except DomainError as exc:
        raise ConfigError(str(exc), "parameters") from None
    targets = {t.quantity: t for t in config.output_targets}
    rows = []
    for q, v, note in vals:
        t = targets.pop(q, None)
        rows.append(ReportRow.make(config.name, q, v, note, t.expected if t else None))
    if targets:
        missing = sorted(targets)[0]
        raise ConfigError(f"target quantity {missing!r} is not produced by this case", "output_targets")
    return rows


def target_breaches(config: Scenario, rows: list[ReportRow]) -> list[ReportRow]:
    tol = {t.quantity: t.rel_tol for t in config.output_targets}
    return [r for r in rows if r.quantity in tol and (r.deviation is None or r.deviation > tol[r.quantity])]


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _sweep_photon(g):
    r = cc.photon_trace_distance(int(g["N"]), g["mean_photon"])
    return {"exact": r.exact, "asymptotic": r.asymptotic, "erfc": r.refined, "relative_gap": r.relative_gap}


def _sweep_spin(g):
    r = cc.spin_trace_distance(int(g["N"]), int(g["M"]))
    return {"exact": r.exact, "asymptotic_printed": r.asymptotic, "asymptotic_gaussian": r.refined,
            "relative_gap": r.relative_gap}


def _sweep_position(g):
    r = cc.position_trace_distance(g["L"], g["m"], g["m0"], g["sigma0"], g["K"])
    return {"quadrature": r.exact, "analytic": r.asymptotic, "relative_gap": r.relative_gap}


def _sweep_scaling(g):
    kind = "sine" if int(g["rf_is_sine"]) else "coherent"
    pt = sine_scaling_curve(g["c"], [int(g["N"])], kind)[0]
    return {"t": pt.t, "rf_mean": pt.rf_mean}


def _sweep_jc(g):
    model = JCModel(int(g["N"]), g["mean_photon"])
    F = average_fidelity_exact(model)
    return {"fidelity_exact": F, "fidelity_second_order": avg_fidelity(int(g["N"]), g["mean_photon"])}


def _sweep_twocopy(g):
    N = int(g["N"])
    return {"photon_numeric": photon_two_copy_numeric(N), "spin_formula": spin_two_copy_trace_distance(N)}


def _sweep_repetitions(g):
    t, p = g["t"], g["p_err"]
    return {"chernoff_n": chernoff_repetitions(t, p),
            "exponential_bound_n": math.log(1.0 / p) / t if t > 0 else math.inf}


SWEEPS: dict[str, tuple[tuple[str, ...], tuple[str, ...], Callable]] = {
    "photon": (("N", "mean_photon"), ("exact", "asymptotic", "erfc", "relative_gap"), _sweep_photon),
    "spin": (("M", "N"), ("exact", "asymptotic_printed", "asymptotic_gaussian", "relative_gap"), _sweep_spin),
    "position": (("K", "L", "m", "m0", "sigma0"), ("quadrature", "analytic", "relative_gap"), _sweep_position),
    "scaling": (("N", "c", "rf_is_sine"), ("t", "rf_mean"), _sweep_scaling),
    "jc": (("N", "mean_photon"), ("fidelity_exact", "fidelity_second_order"), _sweep_jc),
    "twocopy": (("N",), ("photon_numeric", "spin_formula"), _sweep_twocopy),
    "repetitions": (("p_err", "t"), ("chernoff_n", "exponential_bound_n"), _sweep_repetitions),
}


def sweep_csv(case: str, grid: dict[str, list]) -> str:
    """CSV text for the Cartesian product of ``grid``, rows in lexicographic order.

    Non-finite outputs are written as empty cells with an ``unbounded`` column set.
    """
    if case not in SWEEPS:
        raise ConfigError(f"unknown sweep case {case!r}", "case")
    axes, outputs, fn = SWEEPS[case]
    if not isinstance(grid, dict):
        raise ConfigError("expected an object", "grid")
    extra = sorted(set(grid) - set(axes))
    if extra:
        raise ConfigError(f"unknown axis {extra[0]!r}", f"grid.{extra[0]}")
    missing = [a for a in axes if a not in grid]
    if missing and any(len(v) for v in grid.values()):
        raise ConfigError("missing axis", f"grid.{missing[0]}")
    values = {}
    size = 1
    for a in axes:
        vals = grid.get(a, [])
        if not isinstance(vals, list):
            raise ConfigError("expected a list", f"grid.{a}")
        values[a] = sorted(_as_float(v, f"grid.{a}[{i}]") for i, v in enumerate(vals))
        size *= len(values[a])
    if size > MAX_SWEEP_POINTS:
        raise ConfigError(f"grid has {size} points, above {MAX_SWEEP_POINTS}", "grid")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow([*axes, *outputs, "unbounded"])
    if size:
        for combo in itertools.product(*(values[a] for a in axes)):
            g = dict(zip(axes, combo))
            try:
                res = fn(g)
            except DomainError as exc:
                raise ConfigError(str(exc), "grid") from None
            unb = any(isinstance(res[o], float) and math.isinf(res[o]) for o in outputs)
            w.writerow([*(format_number(_tidy(x)) for x in combo),
                        *(format_number(res[o]) for o in outputs), format_number(unb)])
    return buf.getvalue()


def _tidy(x: float):
    return int(x) if float(x).is_integer() and abs(x) < 2**53 else x


def run_sweep(case: str, grid: dict[str, list], output: str | Path) -> Path:
    text = sweep_csv(case, grid)
    path = Path(output)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output: {exc}", "output") from None
    return path


# ---------------------------------------------------------------------------
# Repetition economics
# ---------------------------------------------------------------------------


def emit_repetition_table(t_values: Iterable[float], p_err: float) -> list[ReportRow]:
    """Per ``t``: repetitions from ``(1-t)^n <= p`` and the exponential bound ``ln(1/p)/t``."""
    if not 0.0 < p_err < 1.0:
        raise DomainError("p_err must lie in (0, 1)")
    rows = []
    for t in t_values:
        label = "t=%.17g" % t
        n = chernoff_repetitions(t, p_err)
        rows.append(ReportRow.make("repetitions", f"chernoff_n[{label}]", n, "ceil(ln p / ln(1 - t))"))
        bound = math.log(1.0 / p_err) / t if t > 0 else math.inf
        rows.append(ReportRow.make("repetitions", f"exponential_bound_n[{label}]", bound, "ln(1/p)/t"))
    return rows
