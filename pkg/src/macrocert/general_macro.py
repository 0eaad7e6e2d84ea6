"""General macroscopic states against their Gaussian-dephased counterparts.

The semi-classical counterpart of ``|Psi> = sum_n psi_n |n>`` keeps the
coherences ``psi_n psi_m`` damped by ``exp(-(n-m)^2 / (2 sigma^2))``.  After
twirling with a reference frame the two states can be compared exactly, and
the distance is bounded by the RF number variance divided by ``sigma^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .canonical_cases import shifted_overlap
from .errors import DomainError, SizingError
from .number_states import (
    NumberState,
    RFSpec,
    make_coherent_rf,
    make_sine_rf,
    make_two_branch,
    max_dimension,
    rf_components,
)
from .twirl_u1 import (
    merge_blocks,
    trace_distance_blocks,
    twirl_density_joint,
    twirl_pure_joint,
)


@dataclass(frozen=True, eq=False)
class DephasedState:
    """Dephased density matrix restricted to the support of ``base``.

    ``sigma = 0`` removes every coherence; ``sigma = inf`` keeps the pure state.
    """

    base: NumberState
    sigma: float
    indices: np.ndarray
    matrix: np.ndarray

    def dense(self) -> np.ndarray:
        """Matrix over the full window ``base.offset .. base.top``."""
        d = len(self.base)
        out = np.zeros((d, d))
        ix = self.indices - self.base.offset
        out[np.ix_(ix, ix)] = self.matrix
        return out


def dephasing_mask(indices: np.ndarray, sigma: float) -> np.ndarray:
    diff = indices[:, None] - indices[None, :]
    if sigma == 0.0:
        return (diff == 0).astype(float)
    if math.isinf(sigma):
        return np.ones(diff.shape)
    return np.exp(-(diff.astype(float) ** 2) / (2.0 * sigma * sigma))


def gaussian_dephase(state: NumberState, sigma: float) -> DephasedState:
    if not sigma >= 0.0:
        raise DomainError("sigma must be >= 0")
    idx, amps = state.support()
    if idx.size > 4096:
        raise SizingError(f"dephased matrix over {idx.size} support points is too large")
    mat = np.outer(amps, amps) * dephasing_mask(idx, sigma)
    return DephasedState(state, float(sigma), idx, mat)


def _pair_twirls(state: NumberState, rf, sigma: float):
    deph = gaussian_dephase(state, sigma)
    comps = rf_components(rf)
    out = []
    for w, r in comps:
        if len(r) * len(deph.indices) > max_dimension():
            raise SizingError("joint sector data exceeds the configured maximum dimension")
        out.append((w, twirl_pure_joint(state, r), twirl_density_joint(deph.indices, deph.matrix, r)))
    return out


@dataclass(frozen=True)
class GeneralDistance:
    exact: float
    convexity_bound: float
    components: tuple[float, ...]


def general_distance(state: NumberState, rf, sigma: float) -> GeneralDistance:
    """Exact twirled distance and the convex-combination bound ``sum_i q_i t_i``."""
    parts = _pair_twirls(state, rf, sigma)
    ts = tuple(trace_distance_blocks(a, b) for _, a, b in parts)
    if len(parts) == 1:
        exact = ts[0]
    else:
        pure = merge_blocks((w, a) for w, a, _ in parts)
        deph = merge_blocks((w, b) for w, _, b in parts)
        exact = trace_distance_blocks(pure, deph)
    bound = math.fsum(w * t for (w, _, _), t in zip(parts, ts))
    return GeneralDistance(exact, bound, ts)


def twirled_trace_distance_general(state: NumberState, rf, sigma: float) -> float:
    """Trace distance between the twirled pure state and its dephased counterpart."""
    return general_distance(state, rf, sigma).exact


def rf_variance_average(rf) -> float:
    """``sum_i q_i Var_i`` over the pure components of the RF."""
    return math.fsum(w * s.variance() for w, s in rf_components(rf))


@dataclass(frozen=True)
class BoundReport:
    bound: float
    exact: Optional[float]
    beta: float
    rf_variance_avg: float
    sigma: float

    @property
    def holds(self) -> bool:
        return self.exact is None or self.exact <= self.bound + 1e-10


def variance_bound(rf, beta: float, N: int, state: NumberState | None = None,
                   compute_exact: bool = True) -> BoundReport:
    """``sqrt(sum_i q_i Var_i / N^(2 beta))`` paired with the exact distance.

    The dephasing width is ``sigma = N^beta``; by default the system is the
    two-branch state ``(|0> + |N>)/sqrt(2)``.
    """
    if not beta > 0:
        raise DomainError("beta must be positive")
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    var = rf_variance_average(rf)
    sigma = float(N) ** beta
    bound = math.sqrt(var) / sigma
    exact = None
    if compute_exact:
        if state is None:
            state, _ = make_two_branch(0, int(N))
        exact = twirled_trace_distance_general(state, rf, sigma)
    return BoundReport(bound, exact, float(beta), var, sigma)


@dataclass(frozen=True)
class SectorCheck:
    K: int
    infidelity: float
    bound: float


def sector_fidelity_chain(state: NumberState, rf: NumberState, sigma: float) -> list[SectorCheck]:
    """Per sector, ``1 - <Psi_K|rho_K|Psi_K>`` next to ``Var_K / sigma^2``."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    pure = twirl_pure_joint(state, rf)
    out = []
    for K, blk in pure.blocks.items():
        s = np.array([b[1] for b in blk.basis], dtype=float)
        lam2 = np.diag(blk.matrix)
        # the pure block is rank one; read the signed vector off its largest column
        i0 = int(np.argmax(lam2))
        lam = blk.matrix[:, i0] / math.sqrt(lam2[i0])
        rho = blk.matrix * dephasing_mask(s, sigma)
        fid = float(lam @ rho @ lam)
        mean = float(lam2 @ s)
        var = float(lam2 @ (s - mean) ** 2)
        out.append(SectorCheck(K, 1.0 - fid, var / sigma**2))
    return out


# ---------------------------------------------------------------------------
# Linear-size reference frames
# ---------------------------------------------------------------------------


def sine_rf_for_mean(mean_photon: float) -> NumberState:
    """Sine state whose mean photon number is ``mean_photon`` (window top ``2 * mean``)."""
    return make_sine_rf(int(round(2.0 * mean_photon)))


@dataclass(frozen=True)
class ScalingPoint:
    N: int
    t: float
    rf_mean: float


def two_branch_distance(N: int, rf: NumberState) -> float:
    """Exact twirled distance of ``(|0> + |N>)/sqrt(2)`` from its mixture."""
    return shifted_overlap(rf, N)


def sine_scaling_curve(c: float, N_list: Sequence[int], rf_kind: str = "sine") -> list[ScalingPoint]:
    """Two-branch distance with an RF whose mean photon number is ``c * N``.

    ``rf_kind`` is ``"sine"`` or ``"coherent"`` (the contrast curve).
    """
    if not c >= 0:
        raise DomainError("c must be >= 0")
    if rf_kind not in ("sine", "coherent"):
        raise DomainError("rf_kind must be 'sine' or 'coherent'")
    out = []
    for N in N_list:
        if int(N) != N or N < 1:
            raise DomainError("every N must be a positive integer")
        mean = c * N
        rf = sine_rf_for_mean(mean) if rf_kind == "sine" else make_coherent_rf(mean)
        sup, mix = make_two_branch(0, int(N))
        a = twirl_pure_joint(sup, rf)
        b = merge_blocks((w, twirl_pure_joint(s, rf)) for w, s in mix.components)
        out.append(ScalingPoint(int(N), trace_distance_blocks(a, b), rf.mean()))
    return out


# ---------------------------------------------------------------------------
# Seeded random instances for property checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomInstance:
    seed: int
    state: NumberState
    rf: RFSpec
    beta: float
    N: int

    def joint_dimension(self) -> int:
        return len(self.state) * max(len(s) for _, s in self.rf.build())


def _random_rf(rng: np.random.Generator, max_width: int) -> RFSpec:
    kind = rng.choice(["coherent", "sine", "spin", "custom", "mixture"])
    if kind == "coherent":
        return RFSpec.coherent(float(rng.uniform(0.5, min(40.0, max_width / 8.0))))
    if kind == "sine":
        return RFSpec.sine(int(rng.integers(1, max_width)))
    if kind == "spin":
        return RFSpec.spin_coherent(int(rng.integers(1, max_width)))
    if kind == "custom":
        w = int(rng.integers(1, max_width + 1))
        amps = np.sqrt(rng.dirichlet(np.ones(w)))
        return RFSpec.custom(NumberState.from_unnormalized(int(rng.integers(0, 20)), amps))
    q = float(rng.uniform(0.1, 0.9))
    return RFSpec.mixture([(q, _random_rf_pure(rng, max_width)), (1.0 - q, _random_rf_pure(rng, max_width))])


def _random_rf_pure(rng, max_width):
    while True:
        rf = _random_rf(rng, max_width)
        if rf.kind != "mixture":
            return rf


def random_instance(seed: int, max_joint_dim: int = 2048) -> RandomInstance:
    """Dirichlet-amplitude system state, random RF and ``beta``, all from ``seed``."""
    rng = np.random.default_rng(seed)
    width = int(rng.integers(2, 17))
    amps = np.sqrt(rng.dirichlet(np.ones(width)))
    state = NumberState.from_unnormalized(0, amps)
    while True:
        rf = _random_rf(rng, max(2, max_joint_dim // width - 1))
        inst = RandomInstance(seed, state, rf, float(rng.uniform(0.2, 1.2)), width - 1)
        if inst.joint_dimension() <= max_joint_dim:
            return inst
