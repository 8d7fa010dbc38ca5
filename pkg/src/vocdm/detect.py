"""Block detectors over a known effective channel.

``ml_detect`` is an exhaustive maximum-likelihood search. Candidates are
visited in reflected ``|S|``-ary Gray order, so consecutive candidates
differ in one symbol and the residual ``y - H s`` is updated with a single
column of ``H`` (``O(K)`` per candidate rather than ``O(K^2)``). The symbol
vector is split into a head and a tail half; both halves are enumerated
incrementally and paired through one matrix product using

    ||r - p||^2 = ||r||^2 + ||p||^2 - 2 Re(r^H p).

Ties are broken towards the lexicographically smallest index vector, so
the result does not depend on enumeration or chunking order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceededError, ShapeError
from .modem import Constellation

#: Maximum number of candidate vectors ``|S|^K`` an exhaustive search may visit.
DEFAULT_BUDGET = 2**26

# metric entries materialised per chunk (head rows x tail rows)
_CHUNK_ENTRIES = 2**21
# Gray steps accumulated before resynchronising from scratch
_RESYNC = 2**14


@dataclass(frozen=True)
class DetectionResult:
    s_hat: np.ndarray
    indices: np.ndarray
    metric: float
    candidates_evaluated: int


@lru_cache(maxsize=32)
def gray_digits(n_digits: int, radix: int) -> np.ndarray:
    """All ``radix**n_digits`` digit vectors in reflected Gray order (MSB first).

    Consecutive rows differ in exactly one digit, by +-1.
    """
    count = radix**n_digits
    t = np.arange(count, dtype=np.int64)
    powers = radix ** np.arange(n_digits - 1, -1, -1, dtype=np.int64)
    natural = (t[:, None] // powers[None, :]) % radix
    out = np.empty_like(natural)
    flip = np.zeros(count, dtype=bool)
    for j in range(n_digits):
        d = np.where(flip, radix - 1 - natural[:, j], natural[:, j])
        out[:, j] = d
        flip ^= (d % 2).astype(bool)
    out.setflags(write=False)
    return out


def lex_rank(digits: np.ndarray, radix: int) -> np.ndarray:
    """Lexicographic rank of each digit row (first digit most significant)."""
    n = digits.shape[-1]
    powers = radix ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return digits @ powers


def gray_partial_sums(cols: np.ndarray, points: np.ndarray, offset=None) -> np.ndarray:
    """``offset + cols @ points[g]`` for every Gray row ``g``, by incremental updates.

    Row 0 (and every ``_RESYNC``-th row) is computed from scratch; the rest
    add one scaled column to the previous row.
    """
    k, n = cols.shape
    radix = points.size
    if n == 0:
        base = np.zeros(k, dtype=np.complex128) if offset is None else np.asarray(offset, dtype=np.complex128)
        return base[None, :].copy()
    g = gray_digits(n, radix)
    sym = points[g]
    out = np.empty((g.shape[0], k), dtype=np.complex128)
    changed = np.argmax(g[1:] != g[:-1], axis=1)
    rows = np.arange(1, g.shape[0])
    delta = sym[rows, changed] - sym[rows - 1, changed]
    inc = cols.T[changed] * delta[:, None]
    for start in range(0, g.shape[0], _RESYNC):
        stop = min(start + _RESYNC, g.shape[0])
        first = cols @ sym[start]
        if offset is not None:
            first = first + offset
        out[start] = first
        if stop - start > 1:
            out[start + 1 : stop] = first + np.cumsum(inc[start : stop - 1], axis=0)
    return out


def _check(y, h_eff, c: Constellation, budget: int):
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    h = np.asarray(h_eff, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != y.size:
        raise ShapeError(f"channel shape {h.shape} does not match observation length {y.size}")
    n = h.shape[1]
    if c.size**n > budget:
        raise BudgetExceededError(
            f"ML search over {c.size}^{n} = {c.size**n} candidates exceeds the budget of {budget}; "
            "use a smaller block or the MMSE detector"
        )
    return y, h, n


def _split(n: int) -> int:
    return n - n // 2


def _metric_chunks(y, h, c: Constellation):
    """Yield ``(head_rank, tail_rank, metrics)`` blocks covering every candidate."""
    n = h.shape[1]
    n_head = _split(n)
    radix = c.size
    head = gray_partial_sums(-h[:, :n_head], c.points, offset=y)  # y - H_head s_head
    tail = gray_partial_sums(h[:, n_head:], c.points)
    head_rank = lex_rank(gray_digits(n_head, radix), radix)
    tail_rank = lex_rank(gray_digits(n - n_head, radix), radix) if n > n_head else np.zeros(1, np.int64)
    # Re(r^H p) as one real product over stacked real/imaginary parts
    head_ri = np.hstack([head.real, head.imag])
    tail_ri = np.hstack([tail.real, tail.imag])
    head_e = np.sum(head_ri**2, axis=1)
    tail_e = np.sum(tail_ri**2, axis=1)
    rows = max(1, _CHUNK_ENTRIES // tail.shape[0])
    for start in range(0, head.shape[0], rows):
        sl = slice(start, start + rows)
        metrics = head_ri[sl] @ (-2.0 * tail_ri.T)
        metrics += head_e[sl, None]
        metrics += tail_e[None, :]
        yield head_rank[sl], tail_rank, metrics


def candidate_metrics(y, h_eff, c: Constellation, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """ML metric of every candidate, indexed by lexicographic rank of its index vector."""
    y, h, n = _check(y, h_eff, c, budget)
    n_tail = n - _split(n)
    out = np.empty(c.size**n)
    for hr, tr, m in _metric_chunks(y, h, c):
        out[(hr[:, None] * c.size**n_tail + tr[None, :]).reshape(-1)] = m.reshape(-1)
    return out


def _unrank(rank: int, n: int, radix: int) -> np.ndarray:
    powers = radix ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (rank // powers) % radix


def ml_detect(y, h_eff, c: Constellation, budget: int = DEFAULT_BUDGET) -> DetectionResult:
    """Exhaustive ML: ``argmin_{s in S^K} ||y - H_eff s||^2``."""
    y, h, n = _check(y, h_eff, c, budget)
    n_tail = n - _split(n)
    best_metric = np.inf
    best_rank = -1
    for hr, tr, m in _metric_chunks(y, h, c):
        flat = int(np.argmin(m))
        local = m.flat[flat]
        if local > best_metric:
            continue
        ii, jj = divmod(flat, m.shape[1])
        rank = int(hr[ii] * c.size**n_tail + tr[jj])
        if np.count_nonzero(m == local) > 1:
            ii, jj = np.nonzero(m == local)
            rank = int(np.min(hr[ii] * c.size**n_tail + tr[jj]))
        if local < best_metric or rank < best_rank:
            best_metric, best_rank = local, rank
    idx = _unrank(best_rank, n, c.size)
    s_hat = c.points[idx]
    metric = float(np.sum(np.abs(y - h @ s_hat) ** 2))
    return DetectionResult(s_hat, idx, metric, c.size**n)


def mmse_equalize(y, h_eff, sigma2: float) -> np.ndarray:
    """Soft MMSE estimate ``(H^H H + sigma2 I)^-1 H^H y`` before slicing."""
    if sigma2 <= 0:
        raise ValueError("MMSE detection needs a positive noise variance")
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    h = np.asarray(h_eff, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != y.size:
        raise ShapeError(f"channel shape {h.shape} does not match observation length {y.size}")
    gram = h.conj().T @ h + sigma2 * np.eye(h.shape[1])
    try:
        return np.linalg.solve(gram, h.conj().T @ y)
    except np.linalg.LinAlgError as exc:
        raise ShapeError("regularised Gram matrix is singular") from exc


def mmse_detect(y, h_eff, c: Constellation, sigma2: float) -> DetectionResult:
    """Linear MMSE equalisation followed by per-symbol nearest-point slicing."""
    z = mmse_equalize(y, h_eff, sigma2)
    idx = c.nearest(z)
    s_hat = c.points[idx]
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    metric = float(np.sum(np.abs(y - np.asarray(h_eff) @ s_hat) ** 2))
    return DetectionResult(s_hat, idx, metric, 1)
