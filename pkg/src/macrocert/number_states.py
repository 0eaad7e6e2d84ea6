"""Real-amplitude states over a contiguous window of an integer quantum number.

The same container holds photon-number states, spin states (indexed by the
number of up spins, ``j = m + M/2``) and discretised positions.  Everything
downstream only needs the index arithmetic ``K = n_rf + n_sys``, so the index
unit just has to agree between system and reference frame.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import DegenerateBranchError, DomainError, SizingError

DEFAULT_MAX_DIM = 4_000_000
DEFAULT_TAIL_MASS = 1e-12
NORM_TOL = 1e-12


def max_dimension() -> int:
    """Largest allowed state window; ``MACROCERT_MAX_DIM`` overrides the default."""
    raw = os.environ.get("MACROCERT_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise SizingError(f"MACROCERT_MAX_DIM must be an integer, got {raw!r}") from exc
    if value < 1:
        raise SizingError("MACROCERT_MAX_DIM must be positive")
    return value


def _check_dim(dim: int, what: str) -> None:
    limit = max_dimension()
    if dim > limit:
        raise SizingError(f"{what} needs {dim} entries, above the limit of {limit}")


@dataclass(frozen=True, eq=False)
class NumberState:
    """Pure state ``sum_n a_n |n>`` with real amplitudes on ``offset .. offset+len-1``."""

    offset: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float).ravel()
        if amps.size == 0:
            raise DomainError("a state needs at least one amplitude")
        if not np.all(np.isfinite(amps)):
            raise DomainError("amplitudes must be finite")
        norm = math.fsum(amps * amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"amplitudes are not normalised (sum of squares = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, offset: int, amplitudes: Sequence[float]) -> "NumberState":
        amps = np.asarray(amplitudes, dtype=float).ravel()
        norm = math.sqrt(math.fsum(amps * amps))
        if norm == 0.0:
            raise DomainError("cannot normalise the zero vector")
        return cls(offset, amps / norm)

    @classmethod
    def basis(cls, n: int) -> "NumberState":
        return cls(n, np.ones(1))

    def __len__(self) -> int:
        return self.amplitudes.size

    def __eq__(self, other):
        if not isinstance(other, NumberState):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.amplitudes, other.amplitudes)

    __hash__ = None

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self))

    @property
    def top(self) -> int:
        return self.offset + len(self) - 1

    @property
    def probabilities(self) -> np.ndarray:
        return self.amplitudes**2

    def amplitude(self, n: int) -> float:
        k = n - self.offset
        if 0 <= k < len(self):
            return float(self.amplitudes[k])
        return 0.0

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Indices and amplitudes of the nonzero entries."""
        nz = np.flatnonzero(self.amplitudes)
        return self.indices[nz], self.amplitudes[nz]

    def mean(self) -> float:
        p = self.probabilities
        return float(np.dot(p, self.indices - self.offset)) + self.offset

    def variance(self) -> float:
        """Variance of the index distribution ``a_n^2`` (offset-invariant)."""
        p = self.probabilities
        k = np.arange(len(self), dtype=float)
        mu = np.dot(p, k)
        return float(np.dot(p, (k - mu) ** 2))

    def to_dict(self) -> dict[str, Any]:
        return {"offset": self.offset, "amplitudes": [float(a) for a in self.amplitudes]}


@dataclass(frozen=True)
class MixtureEnsemble:
    """Convex combination of pure number states."""

    components: tuple[tuple[float, NumberState], ...]

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise DomainError("an ensemble needs at least one component")
        for w, s in comps:
            if not 0.0 <= w <= 1.0:
                raise DomainError(f"ensemble weight {w} outside [0, 1]")
            if not isinstance(s, NumberState):
                raise DomainError("ensemble components must be NumberState instances")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > NORM_TOL:
            raise DomainError(f"ensemble weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def pure(cls, state: NumberState) -> "MixtureEnsemble":
        return cls(((1.0, state),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def states(self) -> list[NumberState]:
        return [s for _, s in self.components]


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def make_coherent_rf(mean_photon: float, tail_mass_bound: float = DEFAULT_TAIL_MASS) -> NumberState:
    """Truncated coherent state with Poisson weights ``q_n``.

    The window drops less than ``tail_mass_bound`` of Poisson probability
    before the amplitudes are renormalised.
    """
    mu = float(mean_photon)
    if not (mu >= 0.0 and math.isfinite(mu)):
        raise DomainError(f"mean_photon must be finite and >= 0, got {mean_photon}")
    if not 0.0 < tail_mass_bound <= 1e-6:
        raise DomainError("tail_mass_bound must lie in (0, 1e-6]")
    if mu == 0.0:
        return NumberState.basis(0)
    dist = stats.poisson(mu)
    half = 0.5 * tail_mass_bound
    lo = int(dist.ppf(half))
    hi = int(dist.isf(half)) + 1
    # ppf/isf land on the quantile; step outward until the discarded mass is certified
    while lo > 0 and dist.cdf(lo - 1) >= half:
        lo -= 1
    while dist.sf(hi) >= half:
        hi += 1
    _check_dim(hi - lo + 1, f"coherent state with mean {mu:g}")
    n = np.arange(lo, hi + 1)
    log_q = n * math.log(mu) - mu - gammaln(n + 1.0)
    return NumberState.from_unnormalized(lo, np.exp(0.5 * log_q))


def make_spin_coherent_rf(M: int) -> NumberState:
    """``M`` spins along +x; index ``j`` counts up spins, so ``S_Z = j - M/2``."""
    if int(M) != M or M < 1:
        raise DomainError(f"M must be a positive integer, got {M}")
    M = int(M)
    _check_dim(M + 1, f"spin-coherent state of {M} spins")
    j = np.arange(M + 1)
    log_p = gammaln(M + 1.0) - gammaln(j + 1.0) - gammaln(M - j + 1.0) - M * math.log(2.0)
    amps = np.exp(0.5 * log_p)
    # binomial symmetry is exact; enforce it against rounding in gammaln
    amps = 0.5 * (amps + amps[::-1])
    return NumberState.from_unnormalized(0, amps)


def make_sine_rf(N: int) -> NumberState:
    """Sine state ``sqrt(2/(N+2)) sum_{n=0}^N sin((n+1) pi/(N+2)) |n>``."""
    if int(N) != N or N < 0:
        raise DomainError(f"N must be a non-negative integer, got {N}")
    N = int(N)
    _check_dim(N + 1, f"sine state of size {N}")
    n = np.arange(N + 1)
    amps = math.sqrt(2.0 / (N + 2)) * np.sin((n + 1) * math.pi / (N + 2))
    amps = 0.5 * (amps + amps[::-1])
    return NumberState.from_unnormalized(0, amps)


def make_two_branch(n_low: int, n_high: int) -> tuple[NumberState, MixtureEnsemble]:
    """Equal superposition of two basis states and the matching 50/50 mixture."""
    if int(n_low) != n_low or int(n_high) != n_high:
        raise DomainError("branch labels must be integers")
    n_low, n_high = int(n_low), int(n_high)
    if n_low == n_high:
        raise DegenerateBranchError(f"both branches sit at {n_low}")
    if n_low > n_high:
        raise DomainError("n_low must be smaller than n_high")
    _check_dim(n_high - n_low + 1, "two-branch superposition")
    amps = np.zeros(n_high - n_low + 1)
    amps[0] = amps[-1] = math.sqrt(0.5)
    sup = NumberState.from_unnormalized(n_low, amps)
    mix = MixtureEnsemble(((0.5, NumberState.basis(n_low)), (0.5, NumberState.basis(n_high))))
    return sup, mix


def make_gaussian_grid_rf(sigma_over_step: float, window_halfwidth: int) -> NumberState:
    """Discretised Gaussian wave packet ``a_n ~ exp(-n^2 / (4 s^2))`` on ``-W..W``."""
    s = float(sigma_over_step)
    W = int(window_halfwidth)
    if not s > 0.0:
        raise DomainError("sigma_over_step must be positive")
    if W != window_halfwidth or W < 1:
        raise DomainError("window_halfwidth must be a positive integer")
    if W < 8 * s:
        raise SizingError(f"window half-width {W} is narrower than 8 sigma = {8 * s:g}")
    _check_dim(2 * W + 1, "Gaussian grid state")
    n = np.arange(-W, W + 1)
    dens = np.exp(-(n**2) / (2 * s * s))
    # mass beyond the window, estimated from the continuous tail
    lost = math.erfc((W + 0.5) / (math.sqrt(2) * s))
    if lost > 1e-10:
        raise SizingError(f"window drops {lost:.2e} of the Gaussian mass")
    return NumberState.from_unnormalized(-W, np.sqrt(dens))


# ---------------------------------------------------------------------------
# Declarative reference-frame description
# ---------------------------------------------------------------------------

_RF_FIELDS = {
    "coherent": ("mean_photon",),
    "spin_coherent": ("M",),
    "sine": ("N",),
    "gaussian_grid": ("sigma_over_step", "window_halfwidth"),
    "custom": ("offset", "amplitudes"),
    "mixture": ("components",),
}


@dataclass(frozen=True)
class RFSpec:
    """Reference-frame recipe; :meth:`build` turns it into weighted pure states.

    Use the classmethod constructors (``RFSpec.coherent(4.0)`` ...) or
    :meth:`from_dict` for the JSON form ``{"kind": ..., <fields>}``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _RF_FIELDS:
            raise DomainError(f"unknown RF kind {self.kind!r}")
        expected = set(_RF_FIELDS[self.kind])
        got = set(self.params)
        if got != expected:
            raise DomainError(f"RF kind {self.kind!r} takes fields {sorted(expected)}, got {sorted(got)}")
        p = self.params
        if self.kind == "coherent":
            if not (float(p["mean_photon"]) >= 0.0):
                raise DomainError("mean_photon must be >= 0")
        elif self.kind == "spin_coherent":
            if int(p["M"]) != p["M"] or p["M"] < 1:
                raise DomainError("M must be a positive integer")
        elif self.kind == "sine":
            if int(p["N"]) != p["N"] or p["N"] < 0:
                raise DomainError("N must be a non-negative integer")
        elif self.kind == "gaussian_grid":
            if not float(p["sigma_over_step"]) > 0.0:
                raise DomainError("sigma_over_step must be positive")
            if int(p["window_halfwidth"]) != p["window_halfwidth"] or p["window_halfwidth"] < 1:
                raise DomainError("window_halfwidth must be a positive integer")
        elif self.kind == "mixture":
            comps = p["components"]
            if not comps:
                raise DomainError("a mixture RF needs components")
            for w, sub in comps:
                if not isinstance(sub, RFSpec) or not 0.0 <= w <= 1.0:
                    raise DomainError("mixture components must be (weight in [0,1], RFSpec)")
            total = math.fsum(w for w, _ in comps)
            if abs(total - 1.0) > NORM_TOL:
                raise DomainError(f"mixture weights sum to {total!r}, not 1")

    @classmethod
    def coherent(cls, mean_photon: float) -> "RFSpec":
        return cls("coherent", {"mean_photon": float(mean_photon)})

    @classmethod
    def spin_coherent(cls, M: int) -> "RFSpec":
        return cls("spin_coherent", {"M": int(M)})

    @classmethod
    def sine(cls, N: int) -> "RFSpec":
        return cls("sine", {"N": int(N)})

    @classmethod
    def gaussian_grid(cls, sigma_over_step: float, window_halfwidth: int) -> "RFSpec":
        return cls("gaussian_grid", {"sigma_over_step": float(sigma_over_step),
                                     "window_halfwidth": int(window_halfwidth)})

    @classmethod
    def custom(cls, state: NumberState) -> "RFSpec":
        return cls("custom", {"offset": state.offset,
                              "amplitudes": tuple(float(a) for a in state.amplitudes)})

    @classmethod
    def mixture(cls, components: Sequence[tuple[float, "RFSpec"]]) -> "RFSpec":
        return cls("mixture", {"components": tuple((float(w), s) for w, s in components)})

    def build(self) -> list[tuple[float, NumberState]]:
        """Flatten into ``[(weight, pure state), ...]``; nested mixtures are expanded."""
        p = self.params
        if self.kind == "coherent":
            return [(1.0, make_coherent_rf(p["mean_photon"]))]
        if self.kind == "spin_coherent":
            return [(1.0, make_spin_coherent_rf(p["M"]))]
        if self.kind == "sine":
            return [(1.0, make_sine_rf(p["N"]))]
        if self.kind == "gaussian_grid":
            return [(1.0, make_gaussian_grid_rf(p["sigma_over_step"], p["window_halfwidth"]))]
        if self.kind == "custom":
            return [(1.0, NumberState.from_unnormalized(p["offset"], p["amplitudes"]))]
        out = []
        for w, sub in p["components"]:
            out.extend((w * wi, s) for wi, s in sub.build())
        return out

    def to_dict(self) -> dict[str, Any]:
        p = self.params
        if self.kind == "mixture":
            return {"kind": "mixture",
                    "components": [{"weight": w, "rf": s.to_dict()} for w, s in p["components"]]}
        if self.kind == "custom":
            return {"kind": "custom", "offset": p["offset"], "amplitudes": list(p["amplitudes"])}
        return {"kind": self.kind, **p}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RFSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise DomainError("an RF description must be an object with a 'kind' field")
        kind = data["kind"]
        rest = {k: v for k, v in data.items() if k != "kind"}
        if kind == "coherent":
            cls._exact_keys(kind, rest)
            return cls.coherent(rest["mean_photon"])
        if kind == "spin_coherent":
            cls._exact_keys(kind, rest)
            return cls.spin_coherent(rest["M"])
        if kind == "sine":
            cls._exact_keys(kind, rest)
            return cls.sine(rest["N"])
        if kind == "gaussian_grid":
            cls._exact_keys(kind, rest)
            return cls.gaussian_grid(rest["sigma_over_step"], rest["window_halfwidth"])
        if kind == "custom":
            cls._exact_keys(kind, rest)
            return cls("custom", {"offset": int(rest["offset"]),
                                  "amplitudes": tuple(float(a) for a in rest["amplitudes"])})
        if kind == "mixture":
            cls._exact_keys(kind, rest)
            comps = []
            for item in rest["components"]:
                if set(item) != {"weight", "rf"}:
                    raise DomainError("mixture components take exactly 'weight' and 'rf'")
                comps.append((float(item["weight"]), cls.from_dict(item["rf"])))
            return cls.mixture(comps)
        raise DomainError(f"unknown RF kind {kind!r}")

    @staticmethod
    def _exact_keys(kind, rest):
        expected = set(_RF_FIELDS[kind])
        if set(rest) != expected:
            raise DomainError(f"RF kind {kind!r} takes fields {sorted(expected)}, got {sorted(rest)}")


def rf_components(rf: "RFSpec | NumberState | MixtureEnsemble") -> list[tuple[float, NumberState]]:
    """Accept any RF representation and return weighted pure components."""
    if isinstance(rf, NumberState):
        return [(1.0, rf)]
    if isinstance(rf, MixtureEnsemble):
        return list(rf.components)
    if isinstance(rf, RFSpec):
        return rf.build()
    raise DomainError(f"cannot interpret {type(rf).__name__} as a reference frame")
