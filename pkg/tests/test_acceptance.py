"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances."""

import math
import time

import numpy as np
import pytest

from conftest import CRITERIA_LINES
from macrocert.canonical_cases import (
    photon_asymptotic,
    photon_erfc_form,
    photon_trace_distance,
    spin_exponent_fit,
    spin_trace_distance,
)
from macrocert.distinguish import repetitions_required
from macrocert.general_macro import random_instance, sine_scaling_curve, variance_bound
from macrocert.jc_measurement import JCModel, average_fidelity_exact, fidelity_coefficient
from macrocert.number_states import make_coherent_rf, make_spin_coherent_rf, make_two_branch
from macrocert.report import builtin_scenario, emit_repetition_table, run_scenario
from macrocert.twirl_u1 import trace_distance_blocks, twirl_mixture_joint, twirl_pure_joint
from macrocert.two_copy_relative import (
    brute_force_spin_two_copy,
    photon_two_copy_numeric,
    spin_two_copy_sectors,
    spin_two_copy_trace_distance,
)


def record(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA_LINES.append(line)
    print(line)
    assert ok, line


def oracle_two_branch(N, rf):
    sup, mix = make_two_branch(0, N)
    return trace_distance_blocks(twirl_pure_joint(sup, rf), twirl_mixture_joint(mix, rf))


def test_criterion_1_photon_asymptotics():
    t0 = time.perf_counter()
    r = photon_trace_distance(10, 1e4)
    gap_asym = abs(r.exact - photon_asymptotic(10, 1e4)) / r.exact
    elapsed = time.perf_counter() - t0
    r100 = photon_trace_distance(10, 100.0)
    gap_erfc = abs(r100.exact - photon_erfc_form(10, 100.0)) / r100.exact
    ok = gap_asym < 5e-3 and elapsed < 1.0 and gap_erfc < 1e-3
    record(1, ok, f"gap(mu=1e4)={gap_asym:.2e} erfc gap(mu=100)={gap_erfc:.2e} time={elapsed:.3f}s")


def test_criterion_2_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for N in (1, 2, 5, 10, 20):
        for mu in (4.0, 25.0, 100.0, 400.0):
            exact = photon_trace_distance(N, mu).exact
            worst = max(worst, abs(exact - oracle_two_branch(N, make_coherent_rf(mu))))
    elapsed = time.perf_counter() - t0
    record(2, worst < 1e-10 and elapsed < 10.0, f"max |sum - blocks|={worst:.2e} time={elapsed:.2f}s")


def test_criterion_3_jc_fidelity():
    t0 = time.perf_counter()
    F = average_fidelity_exact(JCModel(1, 400.0, fock_cutoff=700))
    elapsed = time.perf_counter() - t0
    coeff = (1.0 - F) * 400.0
    rel = abs(coeff - 0.2167) / 0.2167
    rel_id = abs(fidelity_coefficient() - 0.072) / 0.072
    ok = rel < 0.05 and rel_id < 5e-3 and elapsed < 30.0
    record(3, ok, f"(1-F)mu={coeff:.5f} rel={rel:.2e} coeff rel={rel_id:.2e} time={elapsed:.2f}s")


def test_criterion_4_two_copy_universality():
    t0 = time.perf_counter()
    spin_dev = max(abs(spin_two_copy_trace_distance(N) - 0.25) for N in range(1, 201))
    brute_dev = 0.0
    for N in (1, 2):
        formula = {s.twice_J: s.delta_p for s in spin_two_copy_sectors(N)}
        brute = {s.twice_J: s.delta_p for s in brute_force_spin_two_copy(N).sectors}
        for key in set(formula) | set(brute):
            brute_dev = max(brute_dev, abs(formula.get(key, 0.0) - brute.get(key, 0.0)))
    photon_dev = max(abs(photon_two_copy_numeric(N) - 0.25) for N in range(1, 11))
    elapsed = time.perf_counter() - t0
    ok = spin_dev < 1e-9 and brute_dev < 1e-10 and photon_dev < 1e-12 and elapsed < 10.0
    record(4, ok, f"spin dev={spin_dev:.1e} brute dev={brute_dev:.1e} photon dev={photon_dev:.1e} "
                  f"time={elapsed:.2f}s")


def test_criterion_5_general_bound():
    t0 = time.perf_counter()
    worst = math.inf
    for seed in range(100):
        inst = random_instance(seed, max_joint_dim=2048)
        assert inst.joint_dimension() <= 2048
        rep = variance_bound(inst.rf, inst.beta, inst.N, state=inst.state)
        worst = min(worst, rep.bound - rep.exact)
    elapsed = time.perf_counter() - t0
    record(5, worst >= -1e-10 and elapsed < 60.0, f"min margin={worst:.3e} time={elapsed:.2f}s")


def test_criterion_6_sine_scaling():
    t0 = time.perf_counter()
    Ns = (8, 16, 32, 64)
    sine = sine_scaling_curve(2.0, Ns, "sine")
    coh = sine_scaling_curve(2.0, Ns, "coherent")
    elapsed = time.perf_counter() - t0
    ok = min(p.t for p in sine) > 0.3 and coh[-1].t < 0.05 and elapsed < 30.0
    record(6, ok, f"sine min t={min(p.t for p in sine):.4f} coherent t(64)={coh[-1].t:.4f} "
                  f"time={elapsed:.2f}s")


@pytest.mark.parametrize("name,quantity,lo,hi", [
    ("cat", "rf_mass_earth_masses", 40.0, 60.0),
    ("molecule-1m", "rf_mass_ug", 1.0, 10.0),
    ("gram-earth", "max_L_um", 0.5, 2.0),
])
def test_criterion_7_scenarios(name, quantity, lo, hi):
    t0 = time.perf_counter()
    rows = run_scenario(builtin_scenario(name))
    elapsed = time.perf_counter() - t0
    value = next(r.value for r in rows if r.quantity == quantity)
    record(7, lo <= value <= hi and elapsed < 1.0, f"{name}: {quantity}={value:.4g} time={elapsed:.3f}s")


def test_criterion_8_spin_exact_vs_oracle():
    grid = [(N, M) for N in (1, 2, 4) for M in (20, 100, 400)]
    worst = 0.0
    for N, M in grid:
        r = spin_trace_distance(N, M)
        assert np.isfinite(r.asymptotic) and np.isfinite(r.refined)
        worst = max(worst, abs(r.exact - oracle_two_branch(N, make_spin_coherent_rf(M))))
    fit = spin_exponent_fit(grid)
    record(8, worst < 1e-10, f"max |sum - blocks|={worst:.2e} fitted coefficient={fit.coefficient:.4f} "
                             f"(printed {fit.printed_coefficient})")


def test_criterion_9_repetitions():
    rows = {r.quantity: r.value for r in emit_repetition_table([0.25], 0.05)}
    n = rows["chernoff_n[t=0.25]"]
    big = repetitions_required(0.05, 100, 1, 1)
    ok = n == 11 and abs(big - 1.60e6) / 1.60e6 < 0.01
    record(9, ok, f"n(t=0.25)={n} repetitions_required={big:.6g}")
