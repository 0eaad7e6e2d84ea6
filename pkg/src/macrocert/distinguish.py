"""Single-shot and many-shot discrimination figures of merit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .number_states import NumberState
from .twirl_u1 import BlockDiagonalState, SectorBlock

EXP_OVERFLOW = 700.0
GOLDEN_TOL = 1e-10


def helstrom_success(t: float) -> float:
    """Optimal equal-prior success probability for states at trace distance ``t``.

    With ``t = ||rho - sigma||_1 / 2`` the optimum is ``1/2 + t/2``.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"trace distance {t} outside [0, 1]")
    return 0.5 + 0.5 * t


def chernoff_bounds(t: float, n: int) -> tuple[float, float]:
    """Bracket ``((1-t)^n, (1-t^2)^(n/2))`` on the ``n``-shot error probability."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"trace distance {t} outside [0, 1]")
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    return (1.0 - t) ** n, (1.0 - t * t) ** (n / 2)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float).ravel()
        if p.size == 0 or np.any(p < 0.0) or not np.all(np.isfinite(p)):
            raise DomainError("probabilities must be finite and non-negative")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {math.fsum(p)!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def __len__(self):
        return self.probabilities.size


def _golden_min(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    # the minimiser may sit on an endpoint, which the interior probes never reach
    best = min(((f(x), x) for x in (a, b, 0.5 * (a + b), lo, hi)))
    return best[1], best[0]


def classical_chernoff_exponent(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    """``-log min_s sum_i p_i^s q_i^(1-s)``; ``math.inf`` for disjoint supports."""
    if len(p) != len(q):
        raise DomainError("distributions have different lengths")
    pa, qa = p.probabilities, q.probabilities
    both = (pa > 0.0) & (qa > 0.0)
    if not both.any():
        return math.inf
    lp, lq = np.log(pa[both]), np.log(qa[both])

    def coeff(s):
        return math.fsum(np.exp(s * lp + (1.0 - s) * lq))

    _, val = _golden_min(coeff, 0.0, 1.0)
    if val <= 0.0:
        return math.inf
    return max(0.0, -math.log(val))


# ---------------------------------------------------------------------------
# Optimal phase-invariant measurement for the photon two-branch task
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseInvariantPOVM:
    """Two-outcome POVM given sector by sector.

    ``plus[K] = (basis, matrix)``; the ``-`` element is the identity minus it.
    """

    plus: dict

    def element(self, K: int, sign: int) -> tuple[tuple, np.ndarray]:
        basis, m = self.plus[K]
        return basis, (m if sign > 0 else np.eye(len(basis)) - m)

    def _expectation(self, blk: SectorBlock, sign: int) -> float:
        if blk.label not in self.plus:
            # unpaired sector: the + element acts as identity there
            return blk.weight if sign > 0 else 0.0
        basis, m = self.element(blk.label, sign)
        pos = {b: i for i, b in enumerate(basis)}
        missing = [b for b in blk.basis if b not in pos]
        if missing:
            raise DomainError(f"state populates {missing[0]} outside the POVM sector basis")
        ix = [pos[b] for b in blk.basis]
        return float(np.sum(m[np.ix_(ix, ix)] * blk.weighted()))

    def outcome_distribution(self, state: BlockDiagonalState) -> OutcomeDistribution:
        p_plus = math.fsum(self._expectation(b, +1) for b in state.blocks.values())
        p_plus = min(max(p_plus, 0.0), 1.0)
        return OutcomeDistribution(np.array([p_plus, 1.0 - p_plus]))

    def success_probability(self, rho_plus: BlockDiagonalState, rho_minus: BlockDiagonalState) -> float:
        """Equal-prior success when outcome + announces ``rho_plus``."""
        a = self.outcome_distribution(rho_plus).probabilities[0]
        b = self.outcome_distribution(rho_minus).probabilities[1]
        return 0.5 * (a + b)


def optimal_photon_povm(N: int, rf: NumberState) -> PhaseInvariantPOVM:
    """Projectors onto ``(|K>|0> + |K-N>|N>)/sqrt(2)`` in every sector that pairs both branches."""
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    idx, _ = rf.support()
    present = set(idx.tolist())
    plus = {}
    half = np.full((2, 2), 0.5)
    for K in idx.tolist():
        if K - N in present:
            # basis sorted by rf index: (K-N, N) before (K, 0)
            plus[K] = (((K - N, N), (K, 0)), half)
    return PhaseInvariantPOVM(plus)


def repetitions_required(p_err: float, N: float, epsilon: float, c: float) -> float:
    """``2 ln(1/p) exp(N^eps / (8c))``; ``math.inf`` once the exponent passes 700."""
    if not 0.0 < p_err < 1.0:
        raise DomainError("p_err must lie in (0, 1)")
    if not (N > 0 and c > 0 and epsilon > 0):
        raise DomainError("N, c and epsilon must be positive")
    expo = N**epsilon / (8.0 * c)
    if expo > EXP_OVERFLOW:
        return math.inf
    return 2.0 * math.log(1.0 / p_err) * math.exp(expo)


def chernoff_repetitions(t: float, p_err: float) -> float:
    """Smallest ``n`` with ``(1-t)^n <= p_err``; ``math.inf`` when ``t == 0``."""
    if not 0.0 < p_err < 1.0:
        raise DomainError("p_err must lie in (0, 1)")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"trace distance {t} outside [0, 1]")
    if t == 0.0:
        return math.inf
    if t == 1.0:
        return 1.0
    return float(math.ceil(math.log(p_err) / math.log1p(-t) - 1e-12))


def expected_distributions(rho_a: BlockDiagonalState, rho_b: BlockDiagonalState,
                           povm: PhaseInvariantPOVM) -> tuple[OutcomeDistribution, OutcomeDistribution]:
    return povm.outcome_distribution(rho_a), povm.outcome_distribution(rho_b)


__all__ = [
    "OutcomeDistribution",
    "PhaseInvariantPOVM",
    "chernoff_bounds",
    "chernoff_repetitions",
    "classical_chernoff_exponent",
    "expected_distributions",
    "helstrom_success",
    "optimal_photon_povm",
    "repetitions_required",
]
