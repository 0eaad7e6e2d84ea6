import math

import numpy as np
import pytest
from hypothesis import given

from macrocert import NotFoundError
from macrocert.canonical_cases import photon_trace_distance
from macrocert.number_states import MixtureEnsemble, NumberState, make_coherent_rf, make_two_branch
from macrocert.twirl_u1 import (
    block_spectrum,
    dense_trace_distance,
    eigen_ensemble,
    joint_density,
    merge_blocks,
    trace_distance_blocks,
    twirl_ensembles,
    twirl_joint_matrix,
    twirl_mixture_joint,
    twirl_pure_joint,
)
from strategies import mixtures, number_states


def _mix(s):
    return MixtureEnsemble.pure(s) if isinstance(s, NumberState) else s


@given(number_states(), number_states())
def test_weight_conservation(sys, rf):
    out = twirl_pure_joint(sys, rf)
    assert abs(out.total_weight() - 1.0) < 1e-10
    for blk in out.blocks.values():
        assert abs(np.trace(blk.matrix) - 1.0) < 1e-10


@given(number_states(), number_states())
def test_idempotence(sys, rf):
    a = twirl_pure_joint(sys, rf)
    pairs, rho = eigen_ensemble(a)
    again = twirl_joint_matrix(pairs, rho)
    assert trace_distance_blocks(a, again) < 1e-10


@given(number_states(), number_states(), number_states())
def test_linearity(s1, s2, rf):
    half = MixtureEnsemble(((0.5, s1), (0.5, s2)))
    joint = twirl_mixture_joint(half, rf)
    merged = merge_blocks([(0.5, twirl_pure_joint(s1, rf)), (0.5, twirl_pure_joint(s2, rf))])
    assert joint.labels == merged.labels
    for K in joint.labels:
        a, b = joint[K], merged[K]
        assert a.basis == b.basis
        assert abs(a.weight - b.weight) < 1e-12
        assert np.allclose(a.weighted(), b.weighted(), atol=1e-12, rtol=0)


@given(mixtures(), mixtures(), number_states())
def test_data_processing_and_dense_route(sa, sb, rf):
    pa, ra = joint_density(sa, rf)
    pb, rb = joint_density(sb, rf)
    # put both joint densities on a common pair list
    pairs = sorted(set(pa) | set(pb))
    if len(pairs) > 256:
        return
    pos = {p: i for i, p in enumerate(pairs)}

    def embed(p, r):
        out = np.zeros((len(pairs), len(pairs)))
        ix = [pos[x] for x in p]
        out[np.ix_(ix, ix)] = r
        return out

    A, B = embed(pa, ra), embed(pb, rb)
    t_blocks = trace_distance_blocks(twirl_mixture_joint(sa, rf), twirl_mixture_joint(sb, rf))
    t_dense_twirl = trace_distance_blocks(twirl_joint_matrix(pairs, A), twirl_joint_matrix(pairs, B))
    assert abs(t_blocks - t_dense_twirl) < 1e-10
    assert t_blocks <= dense_trace_distance(A, B) + 1e-10


@given(mixtures(), mixtures())
def test_twirl_ensembles_rf_mixture(sys, rf):
    out = twirl_ensembles(sys, rf)
    assert abs(out.total_weight() - 1.0) < 1e-10
    manual = merge_blocks((wr, twirl_mixture_joint(sys, r)) for wr, r in rf.components)
    assert trace_distance_blocks(out, manual) < 1e-12


def test_fock_rf_destroys_coherence():
    sup, mix = make_two_branch(0, 2)
    out = twirl_pure_joint(sup, NumberState.basis(0))
    assert all(blk.dim == 1 for blk in out.blocks.values())
    assert trace_distance_blocks(out, twirl_mixture_joint(mix, NumberState.basis(0))) < 1e-15


def test_photon_reference_value():
    # N=2 against a coherent RF of mean 4, three independent routes
    sup, mix = make_two_branch(0, 2)
    rf = make_coherent_rf(4.0)
    t_blocks = trace_distance_blocks(twirl_pure_joint(sup, rf), twirl_mixture_joint(mix, rf))
    pa, ra = joint_density(sup, rf)
    pb, rb = joint_density(mix, rf)
    assert pa == pb
    t_dense = trace_distance_blocks(twirl_joint_matrix(pa, ra), twirl_joint_matrix(pb, rb))
    q = make_coherent_rf(4.0).probabilities
    t_sum = 0.5 * math.fsum(np.sqrt(q[:-2] * q[2:]))
    assert t_blocks == pytest.approx(0.4293008630879031, abs=1e-13)
    assert t_dense == pytest.approx(t_blocks, abs=1e-13)
    assert t_sum == pytest.approx(t_blocks, abs=1e-13)
    assert photon_trace_distance(2, 4.0).exact == pytest.approx(t_blocks, abs=1e-13)


def test_block_spectrum_and_lookup():
    sup, _ = make_two_branch(0, 2)
    out = twirl_pure_joint(sup, make_coherent_rf(4.0))
    spec = block_spectrum(out, 4)
    assert spec[0] >= spec[-1]
    assert math.fsum(spec) == pytest.approx(1.0, abs=1e-12)
    assert 10_000 not in out
    with pytest.raises(NotFoundError):
        out[10_000]
