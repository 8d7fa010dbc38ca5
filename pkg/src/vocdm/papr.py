"""Peak-to-average power ratio of VOCDM and the Fourier baseline.

With a unitary modulation matrix and unit-energy symbols the average power
of ``u`` is one, so the instantaneous PAPR is simply ``max_k |u_k|^2``.
Because ``u`` interleaves ``M`` independent size-``N`` transforms, the
overall (worst-case) PAPR depends only on ``N``, the transform kind and
the constellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fresnel
from .errors import BudgetExceededError
from .modem import Constellation, Kind, ModulationParams, modulate, unitary_idft_matrix
from .numerics import index_vectors

DEFAULT_BUDGET = 2**26

# candidate-sum entries materialised per chunk
_CHUNK_ENTRIES = 2**22


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def instantaneous_papr(u) -> float | np.ndarray:
    """``max_k |u_k|^2`` over the last axis."""
    u = np.asarray(u)
    if u.size == 0 or u.shape[-1] == 0:
        raise ValueError("PAPR of an empty block is undefined")
    out = np.max(np.abs(u) ** 2, axis=-1)
    return float(out) if out.ndim == 0 else out


def theoretical_ccdf(gamma, K: int):
    """``1 - (1 - exp(-gamma))^K`` (gamma in linear units)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    g = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore"):
        out = -np.expm1(K * np.log1p(-np.exp(-np.maximum(g, 0.0))))
    out = np.clip(np.where(g <= 0, 1.0, out), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def theoretical_threshold(prob: float, K: int) -> float:
    """Inverse of :func:`theoretical_ccdf`: the linear gamma with CCDF ``prob``."""
    return float(-np.log(-np.expm1(np.log1p(-prob) / K)))


def empirical_ccdf(papr_values, gamma) -> np.ndarray:
    """Fraction of samples with PAPR strictly above each threshold."""
    v = np.sort(np.asarray(papr_values, dtype=float).reshape(-1))
    g = np.asarray(gamma, dtype=float)
    return (v.size - np.searchsorted(v, g, side="right")) / v.size


def exceed_counts(papr_values, gamma) -> np.ndarray:
    v = np.sort(np.asarray(papr_values, dtype=float).reshape(-1))
    return v.size - np.searchsorted(v, np.asarray(gamma, dtype=float), side="right")


def papr_samples(p: ModulationParams, c: Constellation, trials: int, rng) -> np.ndarray:
    """Instantaneous PAPR of ``trials`` random data blocks."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    out = np.empty(trials)
    batch = max(1, 2**20 // p.K)
    for start in range(0, trials, batch):
        n = min(batch, trials - start)
        s = c.points[rng.integers(0, c.size, size=(n, p.K))]
        out[start : start + n] = instantaneous_papr(modulate(s, p))
    return out


@dataclass(frozen=True)
class CcdfCurve:
    gamma_db: np.ndarray
    empirical: np.ndarray
    theoretical: np.ndarray
    trials: int

    @property
    def gamma(self) -> np.ndarray:
        return db_to_linear(self.gamma_db)


def papr_ccdf_monte_carlo(p: ModulationParams, c: Constellation, trials: int, gamma_db, seed=None) -> CcdfCurve:
    """Empirical PAPR CCDF on a dB grid, next to the ``K``-sample approximation."""
    gamma_db = np.asarray(gamma_db, dtype=float)
    values = papr_samples(p, c, trials, np.random.default_rng(seed))
    gamma = db_to_linear(gamma_db)
    return CcdfCurve(gamma_db, empirical_ccdf(values, gamma), theoretical_ccdf(gamma, p.K), trials)


def _subblock_transform(N: int, kind: Kind) -> np.ndarray:
    if kind is Kind.FRESNEL:
        return np.asarray(fresnel.idfnt_matrix(N))
    if kind is Kind.FOURIER:
        return np.asarray(unitary_idft_matrix(N))
    return np.eye(N, dtype=np.complex128)


def _orbit_representatives(c: Constellation) -> np.ndarray:
    """One point index per orbit of the constellation's rotation symmetry."""
    rots = c.phase_orbit()
    seen: set[int] = set()
    reps = []
    for i, pt in enumerate(c.points):
        if i in seen:
            continue
        reps.append(i)
        for g in rots:
            seen.add(int(np.argmin(np.abs(c.points - g * pt))))
    return np.array(reps)


def overall_papr_exhaustive(
    p: ModulationParams, c: Constellation, budget: int = DEFAULT_BUDGET
) -> tuple[float, np.ndarray]:
    """Worst-case PAPR ``max_{s in S^N} ||T s||_inf^2`` for the sub-block transform ``T``.

    A global rotation mapping the constellation onto itself leaves the peak
    unchanged, so the first symbol is pinned to one representative per
    rotation orbit. The remaining symbols are split in two halves whose
    partial sums are tabulated once and combined chunk by chunk.

    Returns the maximum and a maximizing sub-block.
    """
    N = p.N
    T = _subblock_transform(N, p.kind)
    reps = _orbit_representatives(c)
    n_rest = N - 1
    count = reps.size * c.size**n_rest
    if count > budget:
        raise BudgetExceededError(
            f"overall PAPR search over {count} sub-blocks (N={N}, {c.name}) exceeds the budget of {budget}"
        )
    n_head = n_rest // 2
    n_tail = n_rest - n_head
    head_idx = np.hstack(
        [
            np.repeat(reps, c.size**n_head)[:, None],
            np.tile(index_vectors(n_head, c.size), (reps.size, 1)),
        ]
    )
    tail_idx = index_vectors(n_tail, c.size)
    head = c.points[head_idx] @ T[:, : 1 + n_head].T
    tail = c.points[tail_idx] @ T[:, 1 + n_head :].T
    best, arg = -1.0, (0, 0)
    rows = max(1, _CHUNK_ENTRIES // (tail.shape[0] * N))
    for start in range(0, head.shape[0], rows):
        u = head[start : start + rows, None, :] + tail[None, :, :]
        peak = np.max(u.real**2 + u.imag**2, axis=-1)
        flat = int(np.argmax(peak))
        i, j = divmod(flat, peak.shape[1])
        if peak[i, j] > best:
            best, arg = float(peak[i, j]), (start + i, j)
    s_bar = c.points[np.concatenate([head_idx[arg[0]], tail_idx[arg[1]]])]
    return best, s_bar


def papr_upper_bound(c: Constellation, N: int) -> float:
    """``a * N`` with ``a`` the peak symbol energy."""
    return c.peak_energy * N


def otfs_overall_papr(c: Constellation, N: int) -> float:
    """Closed-form worst case of the Fourier kind, attained by a constant sub-block."""
    return c.peak_energy * N
