"""VOCDM modulation and its special cases.

A block of ``K = M * N`` symbols is modulated by ``Phi_N^H kron I_M``:
the data vector is split into ``M`` interleaved sub-blocks
``s[m::M]`` and each is passed through a size-``N`` inverse DFnT.
``N = 1`` gives single carrier (SC) and ``M = 1`` gives plain OCDM. The
``FOURIER`` kind swaps the DFnT for the unitary IDFT and serves as the
OTFS-equivalent baseline.

All functions accept a single block of shape ``(K,)`` or a batch of
blocks of shape ``(..., K)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import fresnel
from .errors import ShapeError


class Kind(str, enum.Enum):
    FRESNEL = "fresnel"
    FOURIER = "fourier"
    IDENTITY = "identity"


@dataclass(frozen=True)
class ModulationParams:
    M: int
    N: int
    kind: Kind = Kind.FRESNEL

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError(f"M and N must be >= 1, got M={self.M}, N={self.N}")
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def K(self) -> int:
        return self.M * self.N

    @property
    def label(self) -> str:
        if self.kind is Kind.IDENTITY:
            return f"identity({self.K})"
        if self.kind is Kind.FOURIER:
            return f"OTFS({self.M},{self.N})"
        if self.N == 1:
            return f"SC({self.M},1)"
        if self.M == 1:
            return f"OCDM(1,{self.N})"
        return f"VOCDM({self.M},{self.N})"


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-average-energy symbol alphabet.

    ``points[i]`` carries the bit label given by the binary expansion of
    ``i`` (MSB first), so Gray labelling is encoded by the point order.
    """

    name: str
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128).reshape(-1)
        if pts.size == 0:
            raise ValueError("constellation must have at least one point")
        if len(np.unique(np.round(pts, 12))) != pts.size:
            raise ValueError("constellation points must be distinct")
        energy = np.mean(np.abs(pts) ** 2)
        if not np.isclose(energy, 1.0, atol=1e-12):
            raise ValueError(f"average energy must be 1, got {energy}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.size))

    @property
    def peak_energy(self) -> float:
        return float(np.max(np.abs(self.points) ** 2))

    def bit_labels(self) -> np.ndarray:
        """``(size, bits_per_symbol)`` array of 0/1 labels, MSB first."""
        b = self.bits_per_symbol
        idx = np.arange(self.size)
        return (idx[:, None] >> np.arange(b - 1, -1, -1)[None, :]) & 1

    def differences(self) -> np.ndarray:
        """Distinct pairwise differences ``s - s'`` including 0, sorted by magnitude then phase."""
        d = np.subtract.outer(self.points, self.points).reshape(-1)
        d = np.unique(np.round(d, 12))
        order = np.lexsort((np.angle(d), np.abs(d)))
        return d[order]

    def nearest(self, x: np.ndarray) -> np.ndarray:
        """Index of the nearest point for every entry of ``x``."""
        x = np.asarray(x, dtype=np.complex128)
        return np.argmin(np.abs(x[..., None] - self.points) ** 2, axis=-1)

    def phase_orbit(self) -> list[complex]:
        """Unit rotations ``g`` with ``g * S == S`` (including 1)."""
        rots = []
        for k in range(1, 9):
            g = np.exp(2j * np.pi * k / 8)
            rotated = np.round(g * self.points, 9)
            if set(rotated.tolist()) == set(np.round(self.points, 9).tolist()):
                rots.append(complex(g))
        return rots


BPSK = Constellation("bpsk", np.array([1.0, -1.0]))
QPSK = Constellation("qpsk", np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2))
PAM4 = Constellation("4pam", np.array([-3.0, -1.0, 3.0, 1.0]) / np.sqrt(5))

_CONSTELLATIONS = {"bpsk": BPSK, "qpsk": QPSK, "4pam": PAM4, "pam4": PAM4, "4-pam": PAM4}


def get_constellation(name: str) -> Constellation:
    try:
        return _CONSTELLATIONS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}; choose from bpsk, qpsk, 4pam") from None


@lru_cache(maxsize=64)
def unitary_idft_matrix(n: int) -> np.ndarray:
    f = np.fft.ifft(np.eye(n), axis=0, norm="ortho")
    f.setflags(write=False)
    return f


@lru_cache(maxsize=64)
def modulation_matrix(p: ModulationParams) -> np.ndarray:
    """Dense ``K x K`` modulation matrix (read-only, cached)."""
    if p.kind is Kind.IDENTITY:
        a = np.eye(p.K, dtype=np.complex128)
    elif p.kind is Kind.FRESNEL:
        a = np.kron(fresnel.idfnt_matrix(p.N), np.eye(p.M))
    else:
        a = np.kron(unitary_idft_matrix(p.N), np.eye(p.M))
    a.setflags(write=False)
    return a


def _check_length(x: np.ndarray, p: ModulationParams, what: str) -> None:
    if x.ndim == 0 or x.shape[-1] != p.K:
        raise ShapeError(f"{what} must have trailing length K={p.K}, got shape {x.shape}")


def _transform(x: np.ndarray, p: ModulationParams, inverse: bool) -> np.ndarray:
    if p.kind is Kind.IDENTITY or p.N == 1:
        return x.copy()
    grid = x.reshape(*x.shape[:-1], p.N, p.M)
    if p.kind is Kind.FRESNEL:
        out = fresnel.idfnt_apply(grid, axis=-2) if inverse else fresnel.dfnt_apply(grid, axis=-2)
    elif inverse:
        out = np.fft.ifft(grid, axis=-2, norm="ortho")
    else:
        out = np.fft.fft(grid, axis=-2, norm="ortho")
    return out.reshape(x.shape)


def modulate(s, p: ModulationParams) -> np.ndarray:
    """Transmit block ``u = modulation_matrix(p) @ s``."""
    s = np.asarray(s, dtype=np.complex128)
    _check_length(s, p, "data vector")
    return _transform(s, p, inverse=True)


def demodulate(r, p: ModulationParams) -> np.ndarray:
    """Forward transform ``y = modulation_matrix(p)^H @ r``."""
    r = np.asarray(r, dtype=np.complex128)
    _check_length(r, p, "received vector")
    return _transform(r, p, inverse=False)


def subvector(u, p: ModulationParams, m: int) -> np.ndarray:
    """Interleaved sub-block ``[u]_{nM+m}``, n = 0..N-1."""
    if not 0 <= m < p.M:
        raise IndexError(f"sub-block index {m} out of range [0, {p.M})")
    u = np.asarray(u)
    _check_length(u, p, "vector")
    return u[..., m :: p.M]
