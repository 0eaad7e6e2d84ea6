"""Twirling over a U(1) symmetry and block-wise trace distances.

A joint state of reference frame and system, averaged over a global U(1)
action, becomes block diagonal in the conserved total ``K = n_rf + n_sys``.
Each block lives on the basis pairs ``(n_rf, n_sys)`` with that total.  The
same bookkeeping covers photon phase, spin direction (``S_Z`` counted in up
spins) and a discretised centre of mass.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, NotFoundError
from .number_states import MixtureEnsemble, NumberState

WEIGHT_FLOOR = 1e-15

Pair = tuple[int, int]


@dataclass(frozen=True, eq=False)
class SectorBlock:
    """One superselection sector: weight ``P_K`` and a unit-trace matrix."""

    label: int
    basis: tuple[Pair, ...]
    weight: float
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        d = len(self.basis)
        if m.shape != (d, d):
            raise DomainError(f"sector {self.label}: matrix shape {m.shape} does not match basis size {d}")
        for r, s in self.basis:
            if r + s != self.label:
                raise DomainError(f"basis pair {(r, s)} does not add up to sector {self.label}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def weighted(self) -> np.ndarray:
        return self.weight * self.matrix


@dataclass(frozen=True)
class BlockDiagonalState:
    """Map from sector label ``K`` to :class:`SectorBlock`, sorted by ``K``."""

    blocks: Mapping[int, SectorBlock]

    def __post_init__(self):
        object.__setattr__(self, "blocks", dict(sorted(self.blocks.items())))

    @property
    def labels(self) -> list[int]:
        return list(self.blocks)

    def total_weight(self) -> float:
        return math.fsum(b.weight for b in self.blocks.values())

    def __getitem__(self, K: int) -> SectorBlock:
        try:
            return self.blocks[K]
        except KeyError:
            raise NotFoundError(f"sector K={K} is not populated") from None

    def __contains__(self, K) -> bool:
        return K in self.blocks

    def __len__(self) -> int:
        return len(self.blocks)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _finalize(entries: dict[int, tuple[list[Pair], np.ndarray]]) -> BlockDiagonalState:
    """Turn ``K -> (basis, weighted matrix)`` into normalised sector blocks.

    Basis states whose diagonal entry vanishes carry no weight (the matrix is
    PSD) and are removed; sectors below ``WEIGHT_FLOOR`` are dropped and the
    survivors renormalised.
    """
    kept = {}
    for K, (basis, mat) in entries.items():
        diag = np.diag(mat)
        keep = diag > 0.0
        if not keep.any():
            continue
        mat = mat[np.ix_(keep, keep)]
        basis = [b for b, k in zip(basis, keep) if k]
        order = sorted(range(len(basis)), key=lambda i: basis[i])
        mat = mat[np.ix_(order, order)]
        basis = [basis[i] for i in order]
        w = math.fsum(np.diag(mat))
        if w < WEIGHT_FLOOR:
            continue
        kept[K] = (tuple(basis), w, mat)
    total = math.fsum(w for _, w, _ in kept.values())
    if total <= 0.0:
        raise AssertionError("twirl produced no populated sector")
    blocks = {}
    for K, (basis, w, mat) in kept.items():
        m = mat / w
        m = 0.5 * (m + m.T)
        blocks[K] = SectorBlock(K, basis, w / total, m)
    return BlockDiagonalState(blocks)


def _sector_tables(sys_idx: np.ndarray, rf: NumberState):
    """Batched rf amplitudes for every sector reachable from the system support.

    Returns ``(Ks, R)`` where ``R[k, j] = r_{Ks[k] - sys_idx[j]}`` (zero outside
    the rf window).
    """
    Ks = np.arange(rf.offset + sys_idx.min(), rf.top + sys_idx.max() + 1)
    n_rf = Ks[:, None] - sys_idx[None, :]
    pos = n_rf - rf.offset
    inside = (pos >= 0) & (pos < len(rf))
    R = np.where(inside, rf.amplitudes[np.clip(pos, 0, len(rf) - 1)], 0.0)
    return Ks, R


def twirl_density_joint(sys_indices: Sequence[int], sys_matrix: np.ndarray,
                        rf: NumberState) -> BlockDiagonalState:
    """Twirl ``|rf><rf| (x) rho_sys`` where ``rho_sys`` is given on ``sys_indices``.

    ``sys_matrix`` must be a real symmetric unit-trace matrix over the listed
    system quantum numbers.
    """
    sys_idx = np.asarray(sys_indices, dtype=np.int64)
    rho = np.asarray(sys_matrix, dtype=float)
    if rho.shape != (sys_idx.size, sys_idx.size):
        raise DomainError("system matrix does not match its index list")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise DomainError("system matrix must have unit trace")
    Ks, R = _sector_tables(sys_idx, rf)
    mats = R[:, :, None] * rho[None, :, :] * R[:, None, :]
    entries = {}
    for k, K in enumerate(Ks.tolist()):
        basis = [(K - s, s) for s in sys_idx.tolist()]
        entries[K] = (basis, mats[k])
    return _finalize(entries)


def twirl_pure_joint(sys: NumberState, rf: NumberState) -> BlockDiagonalState:
    """Twirl ``|rf>|sys>``; each sector holds the normalised vector ``psi_{K-n} r_n``."""
    idx, amps = sys.support()
    Ks, R = _sector_tables(idx, rf)
    lam = R * amps[None, :]
    entries = {}
    for k, K in enumerate(Ks.tolist()):
        row = lam[k]
        nz = np.flatnonzero(row)
        if nz.size == 0:
            continue
        v = row[nz]
        entries[K] = ([(K - int(s), int(s)) for s in idx[nz]], np.outer(v, v))
    return _finalize(entries)


def merge_blocks(parts: Iterable[tuple[float, BlockDiagonalState]]) -> BlockDiagonalState:
    """Convex combination of twirled states, merged sector by sector."""
    acc: dict[int, dict[Pair, int]] = defaultdict(dict)
    pieces: dict[int, list[tuple[float, SectorBlock]]] = defaultdict(list)
    total = 0.0
    for w, state in parts:
        if w < 0.0:
            raise DomainError("mixture weights must be non-negative")
        total += w
        if w == 0.0:
            continue
        for K, blk in state.blocks.items():
            pieces[K].append((w, blk))
            for b in blk.basis:
                acc[K].setdefault(b, 0)
    if abs(total - 1.0) > 1e-12:
        raise DomainError(f"mixture weights sum to {total!r}, not 1")
    entries = {}
    for K, plist in pieces.items():
        basis = sorted(acc[K])
        pos = {b: i for i, b in enumerate(basis)}
        mat = np.zeros((len(basis), len(basis)))
        for w, blk in plist:
            ix = [pos[b] for b in blk.basis]
            mat[np.ix_(ix, ix)] += w * blk.weighted()
        entries[K] = (basis, mat)
    return _finalize(entries)


def twirl_mixture_joint(sys: MixtureEnsemble, rf: NumberState) -> BlockDiagonalState:
    """Twirl a convex combination of pure system states against a pure RF."""
    return merge_blocks((w, twirl_pure_joint(s, rf)) for w, s in sys.components)


def twirl_ensembles(sys: MixtureEnsemble | NumberState,
                    rf: MixtureEnsemble | NumberState) -> BlockDiagonalState:
    """Twirl ``rho_rf (x) rho_sys`` with both sides given as pure-state ensembles."""
    sys_e = MixtureEnsemble.pure(sys) if isinstance(sys, NumberState) else sys
    rf_e = MixtureEnsemble.pure(rf) if isinstance(rf, NumberState) else rf
    return merge_blocks(
        (ws * wr, twirl_pure_joint(s, r))
        for wr, r in rf_e.components
        for ws, s in sys_e.components
    )


# ---------------------------------------------------------------------------
# Dense joint-space route (used as an independent check on small instances)
# ---------------------------------------------------------------------------


def joint_density(sys: MixtureEnsemble | NumberState,
                  rf: MixtureEnsemble | NumberState) -> tuple[list[Pair], np.ndarray]:
    """Dense ``rho_rf (x) rho_sys`` over all pairs of the two windows."""
    sys_e = MixtureEnsemble.pure(sys) if isinstance(sys, NumberState) else sys
    rf_e = MixtureEnsemble.pure(rf) if isinstance(rf, NumberState) else rf

    def window(ens):
        lo = min(s.offset for s in ens.states)
        hi = max(s.top for s in ens.states)
        rho = np.zeros((hi - lo + 1, hi - lo + 1))
        for w, s in ens.components:
            v = np.zeros(hi - lo + 1)
            v[s.offset - lo: s.offset - lo + len(s)] = s.amplitudes
            rho += w * np.outer(v, v)
        return lo, rho

    lo_r, rho_r = window(rf_e)
    lo_s, rho_s = window(sys_e)
    pairs = [(lo_r + i, lo_s + j) for i in range(rho_r.shape[0]) for j in range(rho_s.shape[0])]
    return pairs, np.kron(rho_r, rho_s)


def twirl_joint_matrix(pairs: Sequence[Pair], matrix: np.ndarray) -> BlockDiagonalState:
    """Project a dense joint density onto its sectors, ``sum_K Pi_K rho Pi_K``."""
    groups: dict[int, list[int]] = defaultdict(list)
    for i, (r, s) in enumerate(pairs):
        groups[r + s].append(i)
    rho = np.asarray(matrix, dtype=float)
    entries = {K: ([tuple(pairs[i]) for i in ix], rho[np.ix_(ix, ix)]) for K, ix in groups.items()}
    return _finalize(entries)


def dense_trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``0.5 * ||a - b||_1`` for real symmetric matrices."""
    return 0.5 * float(np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))).sum())


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _aligned(blk: SectorBlock | None, pos: dict[Pair, int], d: int) -> np.ndarray:
    out = np.zeros((d, d))
    if blk is not None:
        ix = [pos[b] for b in blk.basis]
        out[np.ix_(ix, ix)] = blk.weighted()
    return out


def sector_differences(a: BlockDiagonalState, b: BlockDiagonalState) -> dict[int, np.ndarray]:
    """Weighted block differences ``P^a M^a - P^b M^b`` on the union basis of each sector."""
    out = {}
    for K in sorted(set(a.blocks) | set(b.blocks)):
        ba, bb = a.blocks.get(K), b.blocks.get(K)
        basis = sorted({*(ba.basis if ba else ()), *(bb.basis if bb else ())})
        pos = {p: i for i, p in enumerate(basis)}
        out[K] = _aligned(ba, pos, len(basis)) - _aligned(bb, pos, len(basis))
    return out


def batched_trace_norms(mats: Mapping[int, np.ndarray]) -> dict[int, float]:
    """Trace norm of each symmetric matrix, diagonalising equal sizes together."""
    by_dim: dict[int, list[int]] = defaultdict(list)
    for K, m in mats.items():
        by_dim[m.shape[0]].append(K)
    norms = {}
    for d, Ks in by_dim.items():
        if d == 1:
            for K in Ks:
                norms[K] = abs(float(mats[K][0, 0]))
            continue
        stack = np.stack([mats[K] for K in Ks])
        ev = np.linalg.eigvalsh(stack)
        for K, e in zip(Ks, np.abs(ev).sum(axis=1)):
            norms[K] = float(e)
    return norms


def trace_distance_blocks(a: BlockDiagonalState, b: BlockDiagonalState) -> float:
    """``0.5 * sum_K || P^a_K M^a_K - P^b_K M^b_K ||_1``, summed in ascending ``K``."""
    norms = batched_trace_norms(sector_differences(a, b))
    t = 0.5 * math.fsum(norms[K] for K in sorted(norms))
    return min(max(t, 0.0), 1.0)


def block_spectrum(state: BlockDiagonalState, K: int) -> list[float]:
    """Eigenvalues of the unit-trace sector matrix, largest first."""
    blk = state[K]
    ev = np.linalg.eigvalsh(blk.matrix)[::-1]
    return [float(x) for x in ev]


def eigen_ensemble(state: BlockDiagonalState) -> tuple[list[Pair], np.ndarray]:
    """Rebuild a dense joint density from the sector eigen-decompositions."""
    pairs = sorted({p for blk in state.blocks.values() for p in blk.basis})
    pos = {p: i for i, p in enumerate(pairs)}
    rho = np.zeros((len(pairs), len(pairs)))
    for blk in state.blocks.values():
        w, V = np.linalg.eigh(blk.matrix)
        ix = [pos[p] for p in blk.basis]
        for lam, v in zip(w, V.T):
            if lam <= 0.0:
                continue
            full = np.zeros(len(pairs))
            full[ix] = v
            rho += blk.weight * lam * np.outer(full, full)
    return pairs, rho
