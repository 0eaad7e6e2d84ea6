import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macrocert import DomainError
from macrocert.canonical_cases import photon_trace_distance
from macrocert.general_macro import (
    dephasing_mask,
    gaussian_dephase,
    general_distance,
    random_instance,
    rf_variance_average,
    sector_fidelity_chain,
    sine_rf_for_mean,
    sine_scaling_curve,
    twirled_trace_distance_general,
    variance_bound,
)
from macrocert.number_states import RFSpec, make_coherent_rf, make_two_branch
from strategies import number_states

sigmas = st.one_of(st.just(0.0), st.floats(0.1, 50.0), st.just(math.inf))


@given(number_states(max_width=12), sigmas)
def test_dephasing_is_a_state(state, sigma):
    d = gaussian_dephase(state, sigma)
    rho = d.dense()
    assert np.linalg.eigvalsh(rho).min() >= -1e-10
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert np.array_equal(np.diag(rho), state.amplitudes**2)


def test_dephasing_limits():
    idx = np.arange(4)
    assert np.array_equal(dephasing_mask(idx, 0.0), np.eye(4))
    assert np.array_equal(dephasing_mask(idx, math.inf), np.ones((4, 4)))
    with pytest.raises(DomainError):
        gaussian_dephase(make_two_branch(0, 1)[0], -1.0)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_bound_dominance_random(seed):
    inst = random_instance(seed)
    assert inst.joint_dimension() <= 2048
    rep = variance_bound(inst.rf, inst.beta, inst.N, state=inst.state)
    assert rep.holds
    assert rep.exact <= rep.bound + 1e-10


@given(number_states(max_width=10), st.floats(1.0, 60.0), st.floats(0.5, 8.0))
def test_sector_fidelity_chain(state, mu, sigma):
    for chk in sector_fidelity_chain(state, make_coherent_rf(mu), sigma):
        assert chk.infidelity <= chk.bound + 1e-12


@pytest.mark.parametrize("N,mu", [(1, 4.0), (3, 25.0), (8, 256.0)])
def test_full_dephasing_reduces_to_photon_case(N, mu):
    sup, _ = make_two_branch(0, N)
    t = twirled_trace_distance_general(sup, make_coherent_rf(mu), 0.0)
    assert t == pytest.approx(photon_trace_distance(N, mu).exact, abs=1e-12)


def test_no_dephasing_gives_zero():
    sup, _ = make_two_branch(0, 3)
    assert twirled_trace_distance_general(sup, make_coherent_rf(9.0), math.inf) < 1e-12


def test_mixture_rf_convexity():
    rf = RFSpec.mixture([(0.3, RFSpec.coherent(5.0)), (0.7, RFSpec.sine(12))])
    sup, _ = make_two_branch(0, 2)
    d = general_distance(sup, rf, 1.5)
    assert d.exact <= d.convexity_bound + 1e-12
    assert len(d.components) == 2
    assert rf_variance_average(rf) == pytest.approx(
        0.3 * 5.0 + 0.7 * sine_rf_for_mean(6.0).variance(), rel=1e-9)


def test_variance_bound_large_scale():
    rep = variance_bound(make_coherent_rf(1e6), 1.0, 10_000)
    assert rep.bound == pytest.approx(0.1, rel=1e-6)
    assert rep.exact < rep.bound


def test_sine_scaling_stays_flat_and_coherent_collapses():
    sine = sine_scaling_curve(2.0, [8, 16, 32, 64])
    coh = sine_scaling_curve(2.0, [8, 16, 32, 64], rf_kind="coherent")
    assert all(p.t > 0.3 for p in sine)
    assert all(p.rf_mean == pytest.approx(2.0 * p.N) for p in sine)
    assert [p.t for p in coh] == sorted((p.t for p in coh), reverse=True)
    assert coh[-1].t < 0.05
    with pytest.raises(DomainError):
        sine_scaling_curve(2.0, [0])


def test_random_instance_is_reproducible():
    a, b = random_instance(123), random_instance(123)
    assert a.state == b.state and a.rf.to_dict() == b.rf.to_dict() and a.beta == b.beta
