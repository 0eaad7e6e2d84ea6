"""Spin measurement driven by a coherent laser pulse (Jaynes-Cummings coupling).

A spin-N/2 interacts with a coherent field through ``U = exp(g (J+ a - J- a^dag))``
with ``g = pi/(4 alpha)``, which approximately rotates the spin by pi/2 about
y.  Tracing out the field leaves a noisy measurement.  This module builds
that measurement exactly on a truncated Fock space and to second order in
``g`` from Kraus operators.

Spin basis: index ``k = 0..N`` with ``J_z = (2k - N)/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import CutoffError, DomainError

COMPLETENESS_TOL = 1e-6
MAX_CUTOFF_DOUBLINGS = 2


@dataclass(frozen=True, eq=False)
class SpinOps:
    N: int
    jz: np.ndarray
    jp: np.ndarray
    jm: np.ndarray

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def jy(self) -> np.ndarray:
        return (self.jp - self.jm) / 2j

    @property
    def jx(self) -> np.ndarray:
        return 0.5 * (self.jp + self.jm)

    def commutator_defect(self) -> float:
        """Largest violation of ``[J_z, J_+-] = +-J_+-``."""
        d1 = self.jz @ self.jp - self.jp @ self.jz - self.jp
        d2 = self.jz @ self.jm - self.jm @ self.jz + self.jm
        return float(max(np.abs(d1).max(), np.abs(d2).max()))


def spin_ops(N: int) -> SpinOps:
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    N = int(N)
    k = np.arange(N + 1)
    jz = np.diag((2 * k - N) / 2.0)
    jp = np.zeros((N + 1, N + 1))
    jp[k[1:], k[:-1]] = np.sqrt((k[:-1] + 1.0) * (N - k[:-1]))
    return SpinOps(N, jz, jp, jp.T.copy())


def y_rotation(N: int) -> np.ndarray:
    """``exp(i pi/2 J_y) = exp(pi/4 (J+ - J-))``, a real orthogonal matrix."""
    ops = spin_ops(N)
    return expm(0.25 * math.pi * (ops.jp - ops.jm))


# ---------------------------------------------------------------------------
# Second-order Kraus tables
# ---------------------------------------------------------------------------

_PI = math.pi

#: second-order table, rows indexed by (J_z, J_-, J_+), columns by (J_z, J_+, J_-)
A_TABLE = np.array([
    [1.0, 2.0 - 3.0 * _PI / 4.0, _PI / 4.0],
    [(_PI - 4.0) / 4.0, (_PI - 2.0) ** 2 / 16.0, (20.0 - _PI * (_PI + 4.0)) / 16.0],
    [(_PI + 4.0) / 4.0, (-12.0 - _PI * (_PI - 4.0)) / 16.0, (_PI + 2.0) ** 2 / 16.0],
])

#: first-order coefficients on (J_z, J_+, J_-)
V_TABLE = np.array([1.0, (2.0 - _PI) / 4.0, (2.0 + _PI) / 4.0])

#: the third entry as it is commonly quoted, kept to show it breaks trace preservation
PRINTED_V = np.array([1.0, (2.0 - _PI) / 4.0, (2.0 + _PI) / 2.0])


@dataclass(frozen=True, eq=False)
class PerturbationTables:
    A: np.ndarray = field(default_factory=lambda: A_TABLE.copy())
    v: np.ndarray = field(default_factory=lambda: V_TABLE.copy())


@dataclass(frozen=True, eq=False)
class KrausPair:
    """``K0 = 1 + g^2 C2`` and ``K1 = g C1``, valid to second order in ``g``."""

    c1: np.ndarray
    c2: np.ndarray

    def evaluate(self, gamma: float) -> tuple[np.ndarray, np.ndarray]:
        d = self.c1.shape[0]
        return np.eye(d) + gamma**2 * self.c2, gamma * self.c1

    def trace_defect(self, gamma: float) -> float:
        """``|| 1 - K0^T K0 - K1^T K1 ||`` (spectral norm)."""
        k0, k1 = self.evaluate(gamma)
        d = k0.shape[0]
        return float(np.linalg.norm(np.eye(d) - k0.T @ k0 - k1.T @ k1, 2))

    def second_order_defect(self) -> float:
        """Coefficient of ``g^2`` in the trace-preservation defect; zero for a valid pair."""
        return float(np.abs(self.c2 + self.c2.T + self.c1.T @ self.c1).max())


def kraus_perturbative(N: int, tables: PerturbationTables | None = None) -> KrausPair:
    tables = tables or PerturbationTables()
    ops = spin_ops(N)
    left = (ops.jz, ops.jm, ops.jp)
    right = (ops.jz, ops.jp, ops.jm)
    LAL = sum(tables.A[i, j] * left[i] @ right[j] for i in range(3) for j in range(3))
    Lv = tables.v[0] * ops.jz + tables.v[1] * ops.jp + tables.v[2] * ops.jm
    return KrausPair(c1=(-2.0 / _PI) * Lv, c2=(-2.0 / _PI**2) * LAL)


def fidelity_coefficient() -> float:
    """``(4 + pi^2)/192``: the infidelity is this times ``N(N+2)/mean_photon``."""
    return (4.0 + _PI**2) / 192.0


def avg_fidelity(N: int, mean_photon: float) -> float:
    """Second-order average fidelity ``1 - (4+pi^2)/192 * N(N+2)/mean_photon``."""
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    if not mean_photon > 0:
        raise DomainError("mean_photon must be positive")
    return 1.0 - fidelity_coefficient() * N * (N + 2) / mean_photon


def perturbative_povm(N: int, mean_photon: float, tables: PerturbationTables | None = None) -> list[np.ndarray]:
    """Rotated-frame measurement ``K0^T P_m K0 + K1^T P_m K1`` truncated at ``g^2``."""
    pair = kraus_perturbative(N, tables)
    g2 = (_PI / 4.0) ** 2 / mean_photon
    out = []
    for m in range(N + 1):
        P = np.zeros((N + 1, N + 1))
        P[m, m] = 1.0
        out.append(P + g2 * (pair.c2.T @ P + P @ pair.c2 + pair.c1.T @ P @ pair.c1))
    return out


def delta_m(N: int, m: int, mean_photon: float) -> np.ndarray:
    """Lower-triangular part of the second-order correction to ``|m><m|``.

    ``|m><m| + delta + delta^T`` is the perturbative element; entries lie
    within two steps of ``m``.
    """
    if int(m) != m or not 0 <= m <= N:
        raise DomainError(f"m must lie in 0..{N}")
    if not mean_photon > 0:
        raise DomainError("mean_photon must be positive")
    S = perturbative_povm(N, mean_photon)[m]
    S = S - np.diag(np.eye(N + 1)[m])
    return np.tril(S, -1) + 0.5 * np.diag(np.diag(S))


def qubit_e0(mean_photon: float) -> np.ndarray:
    """Rotated-frame outcome-0 element for a single spin, to order ``1/mean_photon``."""
    mu = mean_photon
    off = -_PI / (32.0 * mu)
    return np.array([[1.0 - (_PI - 2.0) ** 2 / (64.0 * mu), off],
                     [off, (_PI + 2.0) ** 2 / (64.0 * mu)]])


def printed_qubit_e0(mean_photon: float) -> np.ndarray:
    """The commonly quoted closed form, kept for comparison only (it disagrees at O(1/mu))."""
    a2 = mean_photon
    off = (4.0 - _PI) / (16.0 * _PI**2 * a2)
    return np.array([[1.0 - (_PI - 2.0) ** 2 / (64.0 * _PI**2 * a2), off],
                     [off, (0.25 + 1.0 / _PI**2 + 1.0 / _PI) / (16.0 * a2)]])


# ---------------------------------------------------------------------------
# Exact truncated model
# ---------------------------------------------------------------------------


def default_cutoff(N: int, mean_photon: float) -> int:
    return int(math.ceil(mean_photon + 12.0 * math.sqrt(mean_photon) + N))


@dataclass(frozen=True)
class JCModel:
    N: int
    mean_photon: float
    gamma: float | None = None
    fock_cutoff: int | None = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError("N must be a positive integer")
        if not (self.mean_photon > 0 and math.isfinite(self.mean_photon)):
            raise DomainError("mean_photon must be positive and finite")
        object.__setattr__(self, "N", int(self.N))
        if self.gamma is None:
            object.__setattr__(self, "gamma", _PI / (4.0 * math.sqrt(self.mean_photon)))
        elif not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise DomainError("gamma must be finite and >= 0")
        floor = default_cutoff(self.N, self.mean_photon)
        if self.fock_cutoff is None:
            object.__setattr__(self, "fock_cutoff", floor)
        elif int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < floor:
            raise DomainError(f"fock_cutoff must be an integer >= {floor}")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.mean_photon)


def _coherent_amplitudes(mean_photon: float, cutoff: int) -> np.ndarray:
    """``sqrt(q_n)`` for ``n = 0..cutoff``, deliberately not renormalised."""
    n = np.arange(cutoff + 1)
    return np.exp(0.5 * (n * math.log(mean_photon) - mean_photon - gammaln(n + 1.0)))


def _sector_unitaries(N: int, gamma: float, cutoff: int):
    """Per-excitation-number blocks of ``U`` in the spin basis.

    Sector ``k`` holds ``|s, k - s>`` for ``s = 0..N``; rows and columns with a
    photon number outside ``0..cutoff`` are masked out (their entries stay at
    the identity and are never weighted).
    """
    ops = spin_ops(N)
    d = N + 1
    ks = np.arange(cutoff + N + 1)
    n_of = ks[:, None] - np.arange(d)[None, :]
    valid = (n_of >= 0) & (n_of <= cutoff)
    G = np.zeros((ks.size, d, d))
    s = np.arange(N)
    # J+ a: spin s -> s+1, photons n -> n-1
    G[:, s + 1, s] = gamma * ops.jp[s + 1, s][None, :] * np.sqrt(np.maximum(n_of[:, s], 0))
    # -J- a^dag: spin s+1 -> s, photons n -> n+1
    G[:, s, s + 1] = -gamma * ops.jm[s, s + 1][None, :] * np.sqrt(np.maximum(n_of[:, s + 1] + 1, 0))
    G *= valid[:, :, None] & valid[:, None, :]
    return ks, n_of, valid, expm(G)


def _povm_at_cutoff(model: JCModel, cutoff: int) -> list[np.ndarray]:
    N = model.N
    ks, n_of, valid, U = _sector_unitaries(N, model.gamma, cutoff)
    c = _coherent_amplitudes(model.mean_photon, cutoff)
    amp = np.where(valid, c[np.clip(n_of, 0, cutoff)], 0.0)
    W = U * amp[:, None, :]
    return [W[:, m, :].T @ W[:, m, :] for m in range(N + 1)]


def completeness_defect(elements: list[np.ndarray]) -> float:
    d = elements[0].shape[0]
    return float(np.abs(sum(elements) - np.eye(d)).max())


def jc_povm_exact(model: JCModel) -> list[np.ndarray]:
    """Effective spin measurement ``<alpha| U^dag (|m><m| (x) 1) U |alpha>`` for each ``m``.

    The cutoff doubles up to twice if the completeness defect exceeds 1e-6.
    """
    cutoff = model.fock_cutoff
    for _ in range(MAX_CUTOFF_DOUBLINGS + 1):
        E = _povm_at_cutoff(model, cutoff)
        if completeness_defect(E) <= COMPLETENESS_TOL:
            return [0.5 * (e + e.T) for e in E]
        cutoff *= 2
    raise CutoffError(f"completeness defect stays above {COMPLETENESS_TOL} up to cutoff {cutoff // 2}")


def ideal_x_targets(N: int) -> np.ndarray:
    """Columns are ``exp(-i pi/2 J_y)|m>``, the states the rotated measurement should pick out."""
    return y_rotation(N).T


def rotated_povm(elements: list[np.ndarray]) -> list[np.ndarray]:
    """Undo the intended rotation so the ideal measurement becomes ``|m><m|``."""
    R = y_rotation(elements[0].shape[0] - 1)
    return [R @ e @ R.T for e in elements]


def average_fidelity_exact(model: JCModel, elements: list[np.ndarray] | None = None) -> float:
    E = elements if elements is not None else jc_povm_exact(model)
    T = ideal_x_targets(model.N)
    vals = [float(T[:, m] @ E[m] @ T[:, m]) for m in range(model.N + 1)]
    return math.fsum(vals) / (model.N + 1)


@dataclass(frozen=True)
class DisplacementCheck:
    combined_exponent_error: float
    product_form_error: float


def displacement_identity_check(N: int = 1, mean_photon: float = 25.0, cutoff: int | None = None) -> DisplacementCheck:
    """Compare ``U D(alpha)|0,s>`` with ``D(alpha) exp(g(G + 2i alpha J_y))|0,s>``.

    The second form is exact up to Fock truncation; splitting the exponent into
    ``exp(2i alpha g J_y) exp(g G)`` is only approximate, and that error is
    reported alongside.
    """
    alpha = math.sqrt(mean_photon)
    g = _PI / (4.0 * alpha)
    cutoff = cutoff or int(math.ceil(mean_photon + 20.0 * alpha + 40))
    ops = spin_ops(N)
    nf = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1, nf)), 1)
    ad = a.T
    If, Is = np.eye(nf), np.eye(N + 1)
    gen = np.kron(ops.jp, a) - np.kron(ops.jm, ad)
    U = expm(g * gen)
    D = np.kron(Is, expm(alpha * (ad - a)))
    rot = ops.jp - ops.jm  # equals 2i J_y
    combined = expm(g * (gen + alpha * np.kron(rot, If)))
    split = np.kron(expm(g * alpha * rot), If) @ U
    # only low-photon inputs are compared; truncation affects the top of the ladder
    cols = [s * nf for s in range(N + 1)]
    lhs = (U @ D)[:, cols]
    err_c = float(np.abs(lhs - (D @ combined)[:, cols]).max())
    err_s = float(np.abs(lhs - (D @ split)[:, cols]).max())
    return DisplacementCheck(err_c, err_s)
