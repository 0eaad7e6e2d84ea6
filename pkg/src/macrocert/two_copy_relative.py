"""Two copies as mutual reference frames, and states of relative degrees of freedom.

Photon copies: ``|Psi>|Psi>`` against ``Psi (x) Psi`` with ``|Psi> = (|0>+|N>)/sqrt(2)``
and no external phase reference.  Spin copies: ``2N`` qubits, the GHZ-like
state ``(|up>^N + |down>^N)/sqrt(2)`` twice, compared through the total-spin
distribution.  Spin quantum numbers ``J`` are integers here because the
register always has an even number of qubits; :class:`SectorProbability`
stores ``2J`` so the same type could hold half-integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.linalg import null_space
from scipy.stats import unitary_group

from .errors import DomainError, SizingError
from .number_states import NumberState, make_two_branch
from .twirl_u1 import trace_distance_blocks, twirl_ensembles, twirl_pure_joint

BRUTE_FORCE_MAX_N = 4
J2_CLUSTER_TOL = 1e-8


# ---------------------------------------------------------------------------
# Photons
# ---------------------------------------------------------------------------


def photon_two_copy_trace_distance(N: int) -> float:
    """Closed form: only the ``K = N`` sector differs, giving ``1/4`` for every ``N``."""
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    return 0.25


def photon_two_copy_numeric(N: int) -> float:
    """Twirl the two-mode joint state, one copy standing in for the reference frame."""
    sup, mix = make_two_branch(0, N)
    a = twirl_pure_joint(sup, sup)
    b = twirl_ensembles(mix, mix)
    return trace_distance_blocks(a, b)


def photon_single_copy_numeric(N: int) -> float:
    """One copy with no reference at all: the twirl erases the coherence."""
    sup, mix = make_two_branch(0, N)
    vac = NumberState.basis(0)
    return trace_distance_blocks(twirl_pure_joint(sup, vac), twirl_ensembles(mix, vac))


# ---------------------------------------------------------------------------
# Spins: combinatorial sector probabilities
# ---------------------------------------------------------------------------


def _double_factorial_odd(k: int) -> int:
    """``(2k - 1)!!`` with the empty product for ``k = 0``."""
    return math.factorial(2 * k) // (2**k * math.factorial(k))


def spin_two_copy_delta_pj_exact(N: int, J: int) -> Fraction:
    """``P_J(|Psi>|Psi>) - P_J(Psi (x) Psi)`` as an exact rational."""
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    if int(J) != J or not 0 <= J <= N:
        raise DomainError(f"J must be an integer in 0..{N}")
    N, J = int(N), int(J)
    k = N - J
    n_J = Fraction(2 * J + 1, N + J + 1) * math.comb(2 * N, N + J)
    beta = Fraction(math.comb(N, k) ** 2 * math.factorial(k),
                    math.comb(2 * N, 2 * k) * _double_factorial_odd(k))
    return n_J * beta * Fraction((-1) ** k, 2 ** (k + 1) * math.comb(2 * J, J))


def spin_two_copy_delta_pj(N: int, J: int) -> float:
    return float(spin_two_copy_delta_pj_exact(N, J))


@dataclass(frozen=True)
class SectorProbability:
    twice_J: int
    delta_p: float

    @property
    def J(self) -> float:
        return self.twice_J / 2


def spin_two_copy_sectors(N: int) -> list[SectorProbability]:
    return [SectorProbability(2 * J, spin_two_copy_delta_pj(N, J)) for J in range(N + 1)]


def spin_two_copy_trace_distance(N: int) -> float:
    """``1/2 sum_J |Delta P_J|``, summed exactly before rounding."""
    total = sum((abs(spin_two_copy_delta_pj_exact(N, J)) for J in range(N + 1)), Fraction(0))
    return float(total / 2)


# ---------------------------------------------------------------------------
# Spins: brute-force register
# ---------------------------------------------------------------------------

_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]]) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_UP = np.array([1.0, 0.0])
_DOWN = np.array([0.0, 1.0])


def _kron_all(ops):
    return reduce(np.kron, ops)


def collective(op: np.ndarray, n: int) -> np.ndarray:
    """``sum_i op_i`` on ``n`` qubits."""
    eye = np.eye(2)
    return sum(_kron_all([op if j == i else eye for j in range(n)]) for i in range(n))


@dataclass(frozen=True, eq=False)
class QubitRegisterState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        n = int(round(math.log2(a.size)))
        if 2**n != a.size:
            raise DomainError("register dimension must be a power of two")
        if abs(np.vdot(a, a).real - 1.0) > 1e-12:
            raise DomainError("register state is not normalised")
        object.__setattr__(self, "amplitudes", a)

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.amplitudes.size)))


def ghz_copy(N: int) -> QubitRegisterState:
    up = _kron_all([_UP] * N)
    down = _kron_all([_DOWN] * N)
    return QubitRegisterState((up + down) / math.sqrt(2))


def _check_brute_N(N):
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    if N > BRUTE_FORCE_MAX_N:
        raise SizingError(f"brute force handles at most {2 * BRUTE_FORCE_MAX_N} qubits")
    return int(N)


def two_copy_difference(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(rest, cross, Delta)`` on the ``2N``-qubit register.

    ``cross`` holds the two terms that flip one copy up and the other down;
    ``rest = Delta - cross`` changes the total ``S_Z`` and so has no weight in
    any total-spin sector.
    """
    N = _check_brute_N(N)
    up = _kron_all([_UP] * N)
    down = _kron_all([_DOWN] * N)
    mix = 0.5 * (np.outer(up, up) + np.outer(down, down))
    d12 = 0.25 * (np.kron(np.outer(up, down), np.outer(down, up)) + np.kron(np.outer(down, up), np.outer(up, down)))
    pair = np.kron(ghz_copy(N).amplitudes, ghz_copy(N).amplitudes)
    full = np.outer(pair, pair.conj()) - np.kron(mix, mix)
    return full - d12, d12, full


def total_spin_projectors(n_qubits: int) -> dict[int, np.ndarray]:
    """Projectors onto total spin ``J`` keyed by ``2J``, from the spectrum of ``J^2``."""
    S = [collective(op, n_qubits) for op in (_SX, _SY, _SZ)]
    J2 = sum(s @ s for s in S)
    w, V = np.linalg.eigh(J2)
    out = {}
    twice_J = n_qubits % 2
    while twice_J <= n_qubits:
        target = (twice_J / 2) * (twice_J / 2 + 1)
        sel = np.abs(w - target) < J2_CLUSTER_TOL
        if sel.any():
            v = V[:, sel]
            out[twice_J] = v @ v.conj().T
        twice_J += 2
    if sum(int(np.count_nonzero(np.abs(w - (j / 2) * (j / 2 + 1)) < J2_CLUSTER_TOL)) for j in out) != w.size:
        raise AssertionError("J^2 eigenvalues did not cluster onto J(J+1)")
    return out


def sz_pinch(X: np.ndarray, n_qubits: int) -> np.ndarray:
    """Remove coherences between different total ``S_Z``."""
    sz = np.real(np.diag(collective(_SZ, n_qubits)))
    return X * (np.abs(sz[:, None] - sz[None, :]) < 1e-9)


@dataclass(frozen=True)
class BruteForceResult:
    sectors: tuple[SectorProbability, ...]
    off_sector_residual: float

    @property
    def trace_distance(self) -> float:
        return 0.5 * math.fsum(abs(s.delta_p) for s in self.sectors)


def brute_force_spin_two_copy(N: int) -> BruteForceResult:
    """``tr(Pi_J Delta)`` per sector on the explicit ``2N``-qubit register.

    ``off_sector_residual`` is the largest entry of the ``S_Z``-pinched
    non-cross terms, which must vanish.
    """
    N = _check_brute_N(N)
    rest, cross, full = two_copy_difference(N)
    proj = total_spin_projectors(2 * N)
    sectors = tuple(SectorProbability(tj, float(np.real(np.trace(P @ full)))) for tj, P in sorted(proj.items()))
    resid = float(np.abs(sz_pinch(rest, 2 * N)).max())
    return BruteForceResult(sectors, resid)


def _irrep_basis(n_qubits: int) -> dict[int, np.ndarray]:
    """For each ``2J``, an array ``B[M_index, k, :]`` of orthonormal ``|J, M, k>``.

    Highest-weight vectors are the kernel of ``S_+`` inside the ``S_Z = J``
    eigenspace; lowering them with ``S_-`` fills each multiplet.
    """
    sp = collective(_SX + 1j * _SY, n_qubits)
    sm = sp.conj().T
    sz = np.real(np.diag(collective(_SZ, n_qubits)))
    out = {}
    for tj in range(n_qubits % 2, n_qubits + 1, 2):
        J = tj / 2
        idx = np.flatnonzero(np.abs(sz - J) < 1e-9)
        hw = null_space(sp[:, idx]) if idx.size else np.zeros((0, 0))
        if hw.size == 0 or hw.shape[1] == 0:
            continue
        vecs = np.zeros((hw.shape[1], sz.size), dtype=complex)
        vecs[:, idx] = hw.T
        layers = [vecs]
        for step in range(tj):
            M = J - step
            coeff = math.sqrt(J * (J + 1) - M * (M - 1))
            layers.append((sm @ layers[-1].T).T / coeff)
        out[tj] = np.stack(layers)
    return out


def full_su2_twirl_distance(N: int) -> float:
    """Trace distance after averaging over all rotations, not just the ``J`` measurement.

    The twirl maps each sector to ``1/(2J+1) (x) omega_J`` with ``omega_J`` the
    partial trace over ``M``; the trace norm is then ``||omega_J||_1``.
    """
    N = _check_brute_N(N)
    _, _, full = two_copy_difference(N)
    total = []
    for tj, B in _irrep_basis(2 * N).items():
        # omega[k, k'] = sum_M <J M k| Delta |J M k'>
        omega = np.einsum("mka,ab,mlb->kl", B.conj(), full, B)
        omega = 0.5 * (omega + omega.conj().T)
        total.append(float(np.abs(np.linalg.eigvalsh(omega)).sum()))
    return 0.5 * math.fsum(total)


# ---------------------------------------------------------------------------
# Relative degrees of freedom: rotation-invariant four-qubit states
# ---------------------------------------------------------------------------


def _singlet_pairs(pairs: list[tuple[int, int]], n_qubits: int = 4) -> np.ndarray:
    """Product of singlets ``(|01> - |10>)/sqrt(2)`` on the given qubit pairs."""
    out = np.zeros(2**n_qubits)
    for bits in range(2**n_qubits):
        b = [(bits >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
        amp = 1.0
        for i, j in pairs:
            if b[i] == b[j]:
                amp = 0.0
                break
            amp *= (1.0 if b[i] == 0 else -1.0) / math.sqrt(2)
        out[bits] = amp
    return out


def heart_state() -> np.ndarray:
    """Singlets on qubits (1,2) and (3,4)."""
    return _singlet_pairs([(0, 1), (2, 3)])


def diamond_state() -> np.ndarray:
    """Singlet pairings (1,3)(2,4) plus (1,4)(2,3), normalised.

    The two pairings overlap by 1/2, so the sum has squared norm 3 before
    normalisation (not 2).
    """
    v = _singlet_pairs([(0, 2), (1, 3)]) + _singlet_pairs([(0, 3), (1, 2)])
    return v / np.linalg.norm(v)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random rotation: a Haar unitary with its determinant phase removed."""
    U = unitary_group.rvs(2, random_state=rng)
    return U / np.sqrt(np.linalg.det(U))


@dataclass(frozen=True)
class InvarianceReport:
    samples: int
    seed: int
    heart_norm: float
    diamond_norm: float
    overlap: float
    max_deviation: float
    superposition_deviation: float

    @property
    def passed(self) -> bool:
        return (abs(self.heart_norm - 1) < 1e-12 and abs(self.diamond_norm - 1) < 1e-12
                and abs(self.overlap) < 1e-12 and self.max_deviation < 1e-10
                and self.superposition_deviation < 1e-10)


def relative_dof_invariance_check(samples: int, seed: int = 0) -> InvarianceReport:
    """Apply ``U^{(x)4}`` for ``samples`` Haar rotations to both invariant states."""
    if int(samples) != samples or samples < 1:
        raise DomainError("samples must be a positive integer")
    h, d = heart_state(), diamond_state()
    sup = (h + d) / math.sqrt(2)
    rng = np.random.default_rng(seed)
    worst = worst_sup = 0.0
    for _ in range(int(samples)):
        U = random_su2(rng)
        U4 = _kron_all([U] * 4)
        worst = max(worst, float(np.linalg.norm(U4 @ h - h)), float(np.linalg.norm(U4 @ d - d)))
        worst_sup = max(worst_sup, float(np.linalg.norm(U4 @ sup - sup)))
    return InvarianceReport(int(samples), int(seed), float(np.linalg.norm(h)), float(np.linalg.norm(d)),
                            float(h @ d), worst, worst_sup)
