"""CE-BEM doubly selective channel.

The time-varying tap at delay ``l`` is ``h(l, i) = sum_q h[l, q] exp(j 2 pi q i / K)``
for ``l = 0..L`` and ``q = -Q..Q``. The ``rho = (L+1)(2Q+1)`` coefficients
are stored in one vector ordered delay-major inside Doppler-ascending
blocks::

    [h(0,-Q), ..., h(L,-Q), h(0,-Q+1), ..., h(L,Q)]

Every routine that consumes or produces ``h`` uses that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fresnel
from .errors import ShapeError
from .modem import Kind, ModulationParams, modulation_matrix
from .numerics import as_matrix, psd_factor


def num_coefficients(L: int, Q: int) -> int:
    return (L + 1) * (2 * Q + 1)


def coefficient_pairs(L: int, Q: int) -> list[tuple[int, int]]:
    """``(l, q)`` for each position of the coefficient vector."""
    return [(l, q) for q in range(-Q, Q + 1) for l in range(L + 1)]


def coefficient_index(l: int, q: int, L: int, Q: int) -> int:
    return (q + Q) * (L + 1) + l


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Grid sizes plus coefficient covariance.

    ``R_h`` defaults to ``I / rho`` so the expected channel energy is one.
    """

    L: int
    Q: int
    K: int
    R_h: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.L < 0 or self.Q < 0 or self.K < 1:
            raise ValueError(f"need L >= 0, Q >= 0, K >= 1; got L={self.L}, Q={self.Q}, K={self.K}")
        rho = self.rho
        if self.R_h is None:
            r = np.eye(rho, dtype=np.complex128) / rho
        else:
            r = as_matrix(self.R_h).copy()
            if r.shape != (rho, rho):
                raise ShapeError(f"R_h must be {rho}x{rho} for L={self.L}, Q={self.Q}, got {r.shape}")
        b = psd_factor(r)
        r.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "R_h", r)
        object.__setattr__(self, "_factor", b)

    @property
    def rho(self) -> int:
        return num_coefficients(self.L, self.Q)

    @property
    def factor(self) -> np.ndarray:
        """``B`` with ``B @ B^H == R_h``."""
        return self._factor


@dataclass(frozen=True)
class GridMapping:
    tau_max: float
    f_max: float
    T_s: float
    K: int


def grid_from_physical(g: GridMapping) -> tuple[int, int]:
    """``(L, Q) = (floor(tau_max / T_s), ceil(f_max * K * T_s))``."""
    if g.T_s <= 0:
        raise ValueError(f"sampling period must be positive, got {g.T_s}")
    if g.K < 1:
        raise ValueError(f"K must be >= 1, got {g.K}")
    if g.tau_max < 0 or g.f_max < 0:
        raise ValueError("tau_max and f_max must be non-negative")
    return math.floor(g.tau_max / g.T_s), math.ceil(g.f_max * g.K * g.T_s)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_normal(rng: np.random.Generator, size, var: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian samples with variance ``var``."""
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return z * np.sqrt(var / 2.0)


def sample_channel(spec: ChannelSpec, rng_seed=None) -> np.ndarray:
    """Draw ``h = B @ h_white`` with ``h_white ~ CN(0, I)``."""
    rng = _rng(rng_seed)
    return spec.factor @ complex_normal(rng, spec.rho)


def _check_h(h, spec: ChannelSpec) -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128).reshape(-1)
    if h.size != spec.rho:
        raise ShapeError(f"expected {spec.rho} channel coefficients, got {h.size}")
    return h


def tap_gain(h, spec: ChannelSpec, l: int, i) -> complex | np.ndarray:
    """Tap value ``h(l, i)`` at delay ``l`` and time index ``i`` (scalar or array)."""
    h = _check_h(h, spec)
    if not 0 <= l <= spec.L:
        raise IndexError(f"delay {l} out of range [0, {spec.L}]")
    qs = np.arange(-spec.Q, spec.Q + 1)
    coef = h[[coefficient_index(l, q, spec.L, spec.Q) for q in qs]]
    i = np.asarray(i)
    ph = np.exp(2j * np.pi * np.multiply.outer(i % spec.K, qs) / spec.K)
    out = ph @ coef
    return complex(out) if out.ndim == 0 else out


def channel_matrix(h, spec: ChannelSpec) -> np.ndarray:
    """Time-domain ``H = sum h[l, q] D^q Pi^l`` (row ``k`` mixes ``u[k - l]``)."""
    h = _check_h(h, spec)
    K = spec.K
    rows = np.arange(K)
    H = np.zeros((K, K), dtype=np.complex128)
    for c, (l, q) in enumerate(coefficient_pairs(spec.L, spec.Q)):
        H[rows, (rows - l) % K] += h[c] * fresnel.phase_ramp(K, q)
    return H


def apply_channel(u, h, spec: ChannelSpec, sigma2: float = 0.0, rng_seed=None) -> np.ndarray:
    """``r = H u + v`` with ``v ~ CN(0, sigma2 I)``."""
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (spec.K,):
        raise ShapeError(f"transmit block must have shape ({spec.K},), got {u.shape}")
    r = channel_matrix(h, spec) @ u
    if sigma2 > 0:
        r = r + complex_normal(_rng(rng_seed), spec.K, sigma2)
    return r


def effective_channel(h, spec: ChannelSpec, p: ModulationParams) -> np.ndarray:
    """Closed-form VOCDM effective channel.

    ``H_eff = sum alpha_q h[l, q] D_K^q Pi_K^(l + qM)``: coefficient ``(l, q)``
    lands on sub-diagonal ``(l + qM) mod K`` with a row-dependent phase.
    """
    if p.kind is not Kind.FRESNEL:
        raise ValueError(f"closed-form effective channel needs the Fresnel kind, got {p.kind.value}")
    if p.K != spec.K:
        raise ShapeError(f"block size mismatch: modulation K={p.K}, channel K={spec.K}")
    h = _check_h(h, spec)
    K = spec.K
    cols = np.arange(K)
    H = np.zeros((K, K), dtype=np.complex128)
    for c, (l, q) in enumerate(coefficient_pairs(spec.L, spec.Q)):
        rows = (cols + l + q * p.M) % K
        H[rows, cols] += fresnel.alpha(q, p.N) * h[c] * fresnel.phase_ramp(K, q)[rows]
    return H


def effective_channel_dense(h, spec: ChannelSpec, p: ModulationParams) -> np.ndarray:
    """``A^H H A`` for the modulation matrix ``A`` of any kind (brute force)."""
    if p.K != spec.K:
        raise ShapeError(f"block size mismatch: modulation K={p.K}, channel K={spec.K}")
    a = modulation_matrix(p)
    return a.conj().T @ channel_matrix(h, spec) @ a
