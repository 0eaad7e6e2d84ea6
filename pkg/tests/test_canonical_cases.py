import math

import pytest
from hypothesis import given, strategies as st

from macrocert import DomainError
from macrocert.canonical_cases import (
    photon_asymptotic,
    photon_erfc_form,
    photon_trace_distance,
    position_exponent,
    position_overlap_quadrature,
    position_trace_distance,
    rf_size_for_target,
    spin_exponent_fit,
    spin_trace_distance,
)
from macrocert.number_states import make_spin_coherent_rf, make_two_branch
from macrocert.twirl_u1 import trace_distance_blocks, twirl_mixture_joint, twirl_pure_joint


@given(st.integers(5, 30), st.floats(50.0, 400.0))
def test_photon_gap_small_in_gaussian_regime(N, ratio):
    r = photon_trace_distance(N, ratio * N * N)
    assert r.relative_gap < 0.01


@given(st.integers(1, 20), st.floats(1.0, 500.0))
def test_photon_ranges(N, mu):
    r = photon_trace_distance(N, mu)
    assert 0.0 <= r.exact <= 0.5
    assert 0.0 <= r.asymptotic <= 0.5
    assert r.relative_gap == pytest.approx(abs(r.exact - r.asymptotic) / max(r.exact, 1e-30))


def test_photon_monotone_on_grid():
    mus = [4.0, 10.0, 25.0, 100.0, 400.0, 1600.0]
    for N in (1, 2, 5, 10, 20):
        ts = [photon_trace_distance(N, mu).exact for mu in mus]
        assert all(b >= a - 1e-14 for a, b in zip(ts, ts[1:]))
    for mu in mus:
        ts = [photon_trace_distance(N, mu).exact for N in range(1, 25)]
        assert all(b <= a + 1e-14 for a, b in zip(ts, ts[1:]))


def test_erfc_form_converges_to_plain_asymptotic():
    # for mu >> N the erfc factor tends to 2
    for N, mu in ((2, 1e3), (10, 1e4), (5, 500.0)):
        assert photon_erfc_form(N, mu) == pytest.approx(photon_asymptotic(N, mu), rel=1e-3)


def test_photon_erfc_agreement_at_mu_100():
    r = photon_trace_distance(10, 100.0)
    assert abs(r.exact - r.refined) / r.exact < 1e-3


def test_spin_exact_matches_oracle():
    sup, mix = make_two_branch(0, 2)
    rf = make_spin_coherent_rf(20)
    oracle = trace_distance_blocks(twirl_pure_joint(sup, rf), twirl_mixture_joint(mix, rf))
    r = spin_trace_distance(2, 20)
    assert r.exact == pytest.approx(oracle, abs=1e-12)
    assert r.exact == pytest.approx(0.45225, abs=1e-5)


def test_spin_edge_cases():
    assert spin_trace_distance(3, 0).exact == 0.0
    assert spin_trace_distance(5, 3).exact == 0.0
    with pytest.raises(DomainError):
        spin_trace_distance(0, 10)


def test_spin_fit_reports_gaussian_coefficient():
    grid = [(N, M) for N in (1, 2, 4) for M in (20, 100, 400)]
    fit = spin_exponent_fit(grid)
    assert fit.coefficient == pytest.approx(0.5, abs=0.02)
    assert fit.printed_coefficient == 0.125
    assert len(fit.points) == len(grid)


@pytest.mark.parametrize("delta", [0.05 * k for k in range(1, 21)] + [0.5 * k for k in range(1, 21)])
def test_position_quadrature_matches_analytic(delta):
    assert abs(position_overlap_quadrature(delta) - math.exp(-delta * delta / 8.0)) < 1e-9


def test_position_trace_distance():
    r = position_trace_distance(L=1e-6, m=1e-20, m0=1e-26, sigma0=1e-9, K=1e18)
    assert r.exact == pytest.approx(r.asymptotic, abs=1e-9)
    assert position_exponent(1e-6, 1e-20, 1e-26, 1e-9, 1e18) == pytest.approx(1e18 / (8e18))
    with pytest.raises(DomainError):
        position_trace_distance(L=-1.0, m=1.0, m0=1.0, sigma0=1.0, K=1.0)


def test_rf_size_for_target():
    assert rf_size_for_target("photon", 10, 0.5 * math.exp(-1 / 8)) == pytest.approx(100.0)
    assert rf_size_for_target("spin", 1e26, 0.5 * math.exp(-1 / 8)) == pytest.approx(1e52)
    with pytest.raises(DomainError):
        rf_size_for_target("photon", 10, 0.6)
    with pytest.raises(DomainError):
        rf_size_for_target("nope", 10, 0.1)
