"""Exact sums and Gaussian asymptotics for the photon, spin and position cases.

In each case the system is ``(|0> + |N>)/sqrt(2)`` in the relevant quantum
number and the twirled trace distance against the 50/50 mixture reduces to
``t = 1/2 sum_j a_j a_{j+N}`` over the reference-frame amplitudes ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError
from .number_states import NumberState, make_coherent_rf, make_spin_coherent_rf

PRINTED_SPIN_COEFF = 1.0 / 8.0
GAUSSIAN_SPIN_COEFF = 1.0 / 2.0


@dataclass(frozen=True)
class CaseResult:
    exact: float
    asymptotic: float
    relative_gap: float = field(init=False)
    refined: Optional[float] = None
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "relative_gap", abs(self.exact - self.asymptotic) / max(self.exact, 1e-30))

    def as_dict(self) -> dict:
        out = {"exact": self.exact, "asymptotic": self.asymptotic, "relative_gap": self.relative_gap}
        if self.refined is not None:
            out["refined"] = self.refined
        return out


def shifted_overlap(rf: NumberState, shift: int) -> float:
    """``1/2 sum_j a_j a_{j+shift}`` for a real-amplitude window."""
    a = rf.amplitudes
    if shift >= len(a):
        return 0.0
    return 0.5 * math.fsum(a[: len(a) - shift] * a[shift:])


def _check_N(N):
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    return int(N)


def photon_asymptotic(N: float, mean_photon: float) -> float:
    if mean_photon == 0.0:
        return 0.0
    return 0.5 * math.exp(-N * N / (8.0 * mean_photon))


def photon_erfc_form(N: float, mean_photon: float) -> float:
    """Gaussian approximation that keeps the lower edge of the number distribution."""
    if mean_photon == 0.0:
        return 0.0
    mu = mean_photon
    return 0.25 * math.exp(-N * N / (8.0 * mu)) * math.erfc((N - mu) / math.sqrt(2.0 * mu))


def photon_trace_distance(N: int, mean_photon: float) -> CaseResult:
    """Coherent-state RF with mean photon number ``mean_photon``."""
    N = _check_N(N)
    if not mean_photon >= 0.0:
        raise DomainError("mean_photon must be >= 0")
    rf = make_coherent_rf(mean_photon)
    return CaseResult(
        exact=shifted_overlap(rf, N),
        asymptotic=photon_asymptotic(N, mean_photon),
        refined=photon_erfc_form(N, mean_photon),
    )


def spin_trace_distance(N: int, M: int) -> CaseResult:
    """Spin-coherent RF of ``M`` spins; the branches differ by ``N`` up spins.

    ``asymptotic`` is the coefficient-1/8 Gaussian form; the binomial variance
    ``M/4`` actually gives ``exp(-N^2 / (2M))``, available as ``refined``.
    """
    N = _check_N(N)
    if int(M) != M or M < 0:
        raise DomainError("M must be a non-negative integer")
    M = int(M)
    if M == 0:
        return CaseResult(0.0, 0.0, refined=0.0, note="empty reference frame")
    exact = shifted_overlap(make_spin_coherent_rf(M), N) if N <= M else 0.0
    return CaseResult(
        exact=exact,
        asymptotic=0.5 * math.exp(-PRINTED_SPIN_COEFF * N * N / M),
        refined=0.5 * math.exp(-GAUSSIAN_SPIN_COEFF * N * N / M),
    )


@dataclass(frozen=True)
class SpinExponentFit:
    """Least-squares slope of ``-ln(2t)/N^2`` against ``1/M`` through the origin."""

    coefficient: float
    points: tuple[tuple[int, int, float], ...]
    printed_coefficient: float = PRINTED_SPIN_COEFF
    gaussian_coefficient: float = GAUSSIAN_SPIN_COEFF


def spin_exponent_fit(pairs: Sequence[tuple[int, int]]) -> SpinExponentFit:
    """Fit the decay coefficient from exact spin sums at the given ``(N, M)``."""
    xs, ys, pts = [], [], []
    for N, M in pairs:
        t = spin_trace_distance(N, M).exact
        if not 0.0 < t < 0.5:
            continue
        y = -math.log(2.0 * t) / (N * N)
        xs.append(1.0 / M)
        ys.append(y)
        pts.append((int(N), int(M), t))
    if not xs:
        raise DomainError("no (N, M) pair produced a usable trace distance")
    x, y = np.array(xs), np.array(ys)
    return SpinExponentFit(float(np.dot(x, y) / np.dot(x, x)), tuple(pts))


def position_exponent(L: float, m: float, m0: float, sigma0: float, K: float) -> float:
    return (L / sigma0) ** 2 * (m / m0) ** 2 / (8.0 * K)


def position_overlap_quadrature(shift_in_widths: float) -> float:
    """``int sqrt(phi(u) phi(u + delta)) du`` for the unit normal density ``phi``."""
    d = float(shift_in_widths)
    log_norm = -0.5 * math.log(2.0 * math.pi)

    def f(u):
        return math.exp(log_norm - 0.25 * (u * u + (u + d) ** 2))

    centre = -0.5 * d
    lo, hi = centre - 40.0, centre + 40.0
    val, _ = integrate.quad(f, lo, hi, points=[centre], epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def position_trace_distance(L: float, m: float, m0: float, sigma0: float, K: float) -> CaseResult:
    """Centre-of-mass RF of ``K`` particles of mass ``m0`` and width ``sigma0``.

    The system of mass ``m`` is split over distance ``L``; the RF centre of
    mass has spread ``sigma0/sqrt(K)`` and must resolve a shift ``L m/(K m0)``.
    """
    for name, v in (("L", L), ("m", m), ("m0", m0), ("sigma0", sigma0), ("K", K)):
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"{name} must be positive and finite")
    analytic = 0.5 * math.exp(-position_exponent(L, m, m0, sigma0, K))
    delta = (L / sigma0) * (m / m0) / math.sqrt(K)
    exact = 0.5 * position_overlap_quadrature(delta)
    return CaseResult(exact=exact, asymptotic=analytic)


def rf_size_for_target(case: str, size_or_ratio: float, t_target: float) -> float:
    """Invert ``t = 1/2 exp(-x^2/(8 S))`` for the RF size ``S``.

    ``size_or_ratio`` is ``N`` for photon and spin, and ``(L/sigma0)(m/m0)`` for
    position.  Returns ``math.inf`` when the target is too close to 1/2.
    """
    if case not in ("photon", "spin", "position"):
        raise DomainError(f"unknown case {case!r}")
    if not 0.0 < t_target < 0.5:
        raise DomainError("t_target must lie in (0, 1/2)")
    if not size_or_ratio > 0:
        raise DomainError("size_or_ratio must be positive")
    denom = 8.0 * math.log(1.0 / (2.0 * t_target))
    if denom <= 0.0:
        return math.inf
    size = size_or_ratio**2 / denom
    return size if math.isfinite(size) else math.inf
