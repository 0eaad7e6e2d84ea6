import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macrocert import DomainError
from macrocert.jc_measurement import (
    A_TABLE,
    PRINTED_V,
    JCModel,
    PerturbationTables,
    avg_fidelity,
    average_fidelity_exact,
    completeness_defect,
    default_cutoff,
    delta_m,
    displacement_identity_check,
    fidelity_coefficient,
    ideal_x_targets,
    jc_povm_exact,
    kraus_perturbative,
    perturbative_povm,
    qubit_e0,
    rotated_povm,
    spin_ops,
    y_rotation,
)

PI = math.pi
MUS = (1e2, 1e3, 1e4)


@given(st.integers(1, 40))
def test_spin_ops_commutators(N):
    ops = spin_ops(N)
    assert ops.commutator_defect() < 1e-12
    assert np.array_equal(ops.jp, ops.jm.T)
    jx, jy = ops.jx, ops.jy
    assert np.abs(jx @ jy - jy @ jx - 1j * ops.jz).max() < 1e-10


@given(st.integers(1, 12))
def test_y_rotation_maps_jz_to_jx(N):
    R = y_rotation(N)
    ops = spin_ops(N)
    assert np.abs(R @ R.T - np.eye(N + 1)).max() < 1e-12
    # the targets are J_x eigenvectors with eigenvalues (2m - N)/2
    T = ideal_x_targets(N)
    for m in range(N + 1):
        v = T[:, m]
        assert np.abs(ops.jx @ v - (2 * m - N) / 2 * v).max() < 1e-10


def test_a_table_closed_forms():
    expected = [
        [1.0, 2 - 3 * PI / 4, PI / 4],
        [(PI - 4) / 4, (PI - 2) ** 2 / 16, (20 - PI * (PI + 4)) / 16],
        [(PI + 4) / 4, (-12 - PI * (PI - 4)) / 16, (PI + 2) ** 2 / 16],
    ]
    assert np.array_equal(A_TABLE, np.array(expected))


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_kraus_trace_preserving_to_second_order(N):
    pair = kraus_perturbative(N)
    assert pair.second_order_defect() < 1e-12
    # the defect of the truncated pair is fourth order in gamma
    d1, d2 = pair.trace_defect(1e-2), pair.trace_defect(5e-3)
    assert d1 / d2 == pytest.approx(16.0, rel=0.05)


def test_printed_first_order_vector_breaks_trace_preservation():
    bad = kraus_perturbative(1, PerturbationTables(v=PRINTED_V.copy()))
    assert bad.second_order_defect() > 1.0


def test_fidelity_coefficient():
    assert fidelity_coefficient() == pytest.approx((4 + PI**2) / 192)
    assert abs(fidelity_coefficient() - 0.072) / 0.072 < 5e-3
    assert avg_fidelity(1, 400.0) == pytest.approx(1 - 3 * fidelity_coefficient() / 400)


@pytest.fixture(scope="module")
def exact_povms():
    out = {}
    for N in (1, 2, 4):
        for mu in MUS:
            model = JCModel(N, mu)
            out[N, mu] = (model, jc_povm_exact(model))
    return out


def test_completeness(exact_povms):
    for model, E in exact_povms.values():
        assert completeness_defect(E) < 1e-8
        for e in E:
            assert np.linalg.eigvalsh(e).min() > -1e-10


@pytest.mark.parametrize("N", [1, 2, 4])
def test_fidelity_convergence(exact_povms, N):
    scaled = []
    for mu in MUS:
        model, E = exact_povms[N, mu]
        F = average_fidelity_exact(model, E)
        scaled.append(abs(F - avg_fidelity(N, mu)) * mu**1.5)
    assert scaled[1] <= scaled[0] * 1.05 and scaled[2] <= scaled[1] * 1.05


@pytest.mark.parametrize("N", [1, 2, 4])
def test_perturbative_povm_against_exact(exact_povms, N):
    errs = []
    for mu in MUS:
        _, E = exact_povms[N, mu]
        R = rotated_povm(E)
        P = perturbative_povm(N, mu)
        errs.append(max(np.abs(r - p).max() for r, p in zip(R, P)) * mu**1.5)
    assert errs[1] <= errs[0] * 1.05 and errs[2] <= errs[1] * 1.05


def test_qubit_e0_against_exact(exact_povms):
    for mu in MUS:
        _, E = exact_povms[1, mu]
        err = np.abs(rotated_povm(E)[0] - qubit_e0(mu)).max()
        assert err * mu < 0.05 * (1e2 / mu) ** 0.5 + 1e-3


def test_delta_m_structure():
    d = delta_m(3, 1, 100.0)
    assert np.array_equal(d, np.tril(d))
    full = np.eye(4)[1][:, None] * np.eye(4)[1][None, :] + d + d.T
    assert np.allclose(full, perturbative_povm(3, 100.0)[1], atol=1e-15)
    with pytest.raises(DomainError):
        delta_m(3, 4, 100.0)


def test_model_validation():
    assert default_cutoff(1, 400.0) == 641
    with pytest.raises(DomainError):
        JCModel(1, 400.0, fock_cutoff=100)
    with pytest.raises(DomainError):
        JCModel(0, 400.0)


@settings(max_examples=5)
@given(st.integers(1, 3))
def test_exact_fidelity_at_mu_400(N):
    F = average_fidelity_exact(JCModel(N, 400.0))
    assert (1 - F) * 400 == pytest.approx(fidelity_coefficient() * N * (N + 2), rel=0.05)


def test_displacement_identity():
    chk = displacement_identity_check(1, 25.0)
    assert chk.combined_exponent_error < 1e-10
    assert chk.product_form_error > 1e-4
