"""Diversity analysis of VOCDM over CE-BEM channels.

The effective channel places coefficient ``(l, q)`` on sub-diagonal
``o(l, q) = (l + qM) mod K``. The set of occupied sub-diagonals bounds the
data-dependent diversity ``G_d(s) = min_{e != 0} rank C(s, e)`` from above,
and reaches ``rho`` once ``M >= L + 1`` and ``N >= 2Q + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fresnel
from .channel import ChannelSpec, coefficient_pairs, num_coefficients
from .errors import BudgetExceededError, ShapeError
from .modem import Constellation, ModulationParams
from .numerics import RANK_RTOL, eigvals_hermitian, index_vectors, numerical_rank, psd_factor

#: Maximum number of error vectors visited by an exhaustive diversity search.
DEFAULT_ERROR_BUDGET = 2**20
DEFAULT_SAMPLES = 10_000


def subdiagonal_index(l: int, q: int, M: int, K: int) -> int:
    return (l + q * M) % K


@dataclass(frozen=True)
class OrderSet:
    members: tuple[int, ...]
    L: int
    Q: int
    M: int
    N: int

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def rho(self) -> int:
        return num_coefficients(self.L, self.Q)

    def __contains__(self, o: int) -> bool:
        return o in self.members


def order_set(L: int, Q: int, M: int, N: int) -> OrderSet:
    """Sub-diagonals of ``H_eff`` that carry at least one channel coefficient."""
    K = M * N
    if K < 1:
        raise ValueError("M * N must be >= 1")
    members = {subdiagonal_index(l, q, M, K) for l, q in coefficient_pairs(L, Q)}
    return OrderSet(tuple(sorted(members)), L, Q, M, N)


@dataclass(frozen=True)
class MaxOrderCheck:
    holds: bool
    order_size: int
    rho: int

    @property
    def attains_rho(self) -> bool:
        return self.order_size == self.rho


def check_max_order_condition(L: int, Q: int, M: int, N: int) -> MaxOrderCheck:
    """Whether ``M >= L + 1`` and ``N >= 2Q + 1``, with the actual ``|O|`` and ``rho``."""
    return MaxOrderCheck(
        holds=M >= L + 1 and N >= 2 * Q + 1,
        order_size=order_set(L, Q, M, N).size,
        rho=num_coefficients(L, Q),
    )


def _column_operators(spec: ChannelSpec, p: ModulationParams):
    K = spec.K
    for l, q in coefficient_pairs(spec.L, spec.Q):
        yield fresnel.alpha(q, p.N) * fresnel.phase_ramp(K, q), (l + q * p.M) % K


def error_matrices(errors, spec: ChannelSpec, p: ModulationParams) -> np.ndarray:
    """Stack of ``C(s, e)`` for each row of ``errors``; shape ``(n, K, rho)``."""
    if p.K != spec.K:
        raise ShapeError(f"block size mismatch: modulation K={p.K}, channel K={spec.K}")
    e = np.atleast_2d(np.asarray(errors, dtype=np.complex128))
    if e.shape[-1] != spec.K:
        raise ShapeError(f"error vectors must have length K={spec.K}, got {e.shape[-1]}")
    cols = [weight * np.roll(e, shift, axis=-1) for weight, shift in _column_operators(spec, p)]
    return np.stack(cols, axis=-1)


def error_matrix(s, e, spec: ChannelSpec, p: ModulationParams) -> np.ndarray:
    """``C(s, e) = [c(0,-Q), ..., c(L,Q)]`` with ``c(l,q) = alpha_q D^q Pi^(l+qM) e``.

    Column order matches the channel coefficient order, so ``H_eff @ e == C @ h``.
    The matrix depends on ``s`` only through the admissible errors; ``s`` is
    accepted to mirror ``C(s, e)``.
    """
    e = np.asarray(e, dtype=np.complex128).reshape(-1)
    if not np.any(e):
        raise ValueError("error vector must be nonzero")
    if s is not None and np.asarray(s).size != spec.K:
        raise ShapeError(f"data vector must have length K={spec.K}")
    return error_matrices(e, spec, p)[0]


def witness_epsilon(c: Constellation, s0=None) -> complex | None:
    """Smallest-magnitude nonzero symbol difference; realizable at ``s0`` if given."""
    diffs = c.differences()
    diffs = diffs[np.abs(diffs) > 1e-12]
    if s0 is None:
        return complex(diffs[0])
    for d in diffs:
        if np.min(np.abs(c.points - (s0 - d))) < 1e-9:
            return complex(d)
    return None


def witness_error(c: Constellation, K: int, which: str, s=None) -> np.ndarray | None:
    """Deterministic witness errors ``e0 = eps * 1_K`` or ``e1 = [eps, 0, ..., 0]``.

    With ``s`` given, ``eps`` is chosen so that ``s - e`` stays in the
    constellation; ``None`` is returned when no such ``eps`` exists (only
    possible for ``e0``).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if which == "e1":
        eps = witness_epsilon(c, None if s is None else np.asarray(s)[0])
        e = np.zeros(K, dtype=np.complex128)
        e[0] = eps
        return e
    if which != "e0":
        raise ValueError(f"unknown witness {which!r}; expected 'e0' or 'e1'")
    if s is None:
        return np.full(K, witness_epsilon(c), dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    diffs = c.differences()
    for d in diffs[np.abs(diffs) > 1e-12]:
        after = s - d
        if np.all(np.min(np.abs(after[:, None] - c.points[None, :]), axis=1) < 1e-9):
            return np.full(K, d, dtype=np.complex128)
    return None


def pep_upper_bound(C, R_h, sigma2: float, rel_tol: float = RANK_RTOL) -> float:
    """``prod_i (1 + lambda_i / (4 sigma2))^-1`` over nonzero eigenvalues of ``B^H C^H C B``."""
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    C = np.asarray(C, dtype=np.complex128)
    B = psd_factor(R_h)
    G = B.conj().T @ C.conj().T @ C @ B
    lam = eigvals_hermitian(0.5 * (G + G.conj().T))
    if lam.size == 0 or lam[0] <= 0:
        return 1.0
    lam = lam[lam > rel_tol * lam[0]]
    return float(np.prod(1.0 / (1.0 + lam / (4.0 * sigma2))))


@dataclass(frozen=True)
class DiversityEstimate:
    """Minimum rank found and the error attaining it.

    ``exact`` is True only for exhaustive searches; sampled values are upper
    estimates of the true minimum.
    """

    value: int
    argmin_error: np.ndarray
    exact: bool
    errors_evaluated: int
    error_set: str


def _min_rank(errors: np.ndarray, spec, p, rel_tol, chunk: int = 8192):
    best, arg = None, None
    for start in range(0, errors.shape[0], chunk):
        block = errors[start : start + chunk]
        ranks = numerical_rank(error_matrices(block, spec, p), rel_tol)
        i = int(np.argmin(ranks))
        if best is None or ranks[i] < best:
            best, arg = int(ranks[i]), block[i]
    return best, arg


def _exhaustive_errors(s, c: Constellation, K: int, error_set: str, budget: int) -> np.ndarray:
    if error_set == "difference":
        alphabet = c.differences()
    else:
        alphabet = c.points
    count = alphabet.size**K
    if count > budget:
        raise BudgetExceededError(
            f"exhaustive diversity search needs {alphabet.size}^{K} = {count} error patterns, "
            f"budget is {budget}"
        )
    cand = alphabet[index_vectors(K, alphabet.size)]
    errors = cand if error_set == "difference" else s[None, :] - cand
    return errors[np.any(np.abs(errors) > 1e-12, axis=1)]


def _sampled_errors(s, c: Constellation, K: int, error_set: str, n_samples: int, rng) -> np.ndarray:
    if error_set == "difference":
        alphabet = c.differences()
        errors = alphabet[rng.integers(0, alphabet.size, size=(n_samples, K))]
    else:
        errors = s[None, :] - c.points[rng.integers(0, c.size, size=(n_samples, K))]
    witnesses = [witness_error(c, K, "e1", s if error_set == "realizable" else None)]
    e0 = witness_error(c, K, "e0", s if error_set == "realizable" else None)
    if e0 is not None:
        witnesses.append(e0)
    errors = np.vstack([np.array(witnesses), errors])
    return errors[np.any(np.abs(errors) > 1e-12, axis=1)]


def data_dependent_diversity(
    s,
    spec: ChannelSpec,
    p: ModulationParams,
    c: Constellation,
    mode: str = "exhaustive",
    *,
    error_set: str | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    seed=None,
    budget: int = DEFAULT_ERROR_BUDGET,
    rel_tol: float = RANK_RTOL,
) -> DiversityEstimate:
    """Minimum rank of ``C(s, e)`` over nonzero errors.

    ``error_set`` selects the search domain: ``"difference"`` lets every
    entry range over the difference alphabet ``{s - s'}``; ``"realizable"``
    only allows ``e = s - s'`` with ``s'`` a valid data vector. Exhaustive
    mode defaults to ``"difference"``, sampled mode to ``"realizable"``.
    Sampled mode always includes the ``e1`` witness (and ``e0`` when it is
    admissible).
    """
    if spec.rho > spec.K:
        raise ValueError(f"diversity analysis assumes K >= rho, got K={spec.K}, rho={spec.rho}")
    if p.K != spec.K:
        raise ShapeError(f"block size mismatch: modulation K={p.K}, channel K={spec.K}")
    s = np.asarray(s, dtype=np.complex128).reshape(-1)
    if s.size != spec.K:
        raise ShapeError(f"data vector must have length K={spec.K}")
    if error_set not in (None, "difference", "realizable"):
        raise ValueError(f"unknown error set {error_set!r}")
    if mode == "exhaustive":
        error_set = error_set or "difference"
        errors = _exhaustive_errors(s, c, spec.K, error_set, budget)
    elif mode == "sampled":
        error_set = error_set or "realizable"
        errors = _sampled_errors(s, c, spec.K, error_set, n_samples, np.random.default_rng(seed))
    else:
        raise ValueError(f"unknown mode {mode!r}; expected 'exhaustive' or 'sampled'")
    value, arg = _min_rank(errors, spec, p, rel_tol)
    return DiversityEstimate(value, arg, mode == "exhaustive", errors.shape[0], error_set)
