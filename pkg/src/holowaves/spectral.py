"""Periodic pseudospectral layer.

The real line is approximated by a torus of period ``L`` sampled at ``N``
equispaced collocation points ``alpha_j = j L / N``.  Fourier coefficients use
the convention

    c_k = (1/N) sum_j f(alpha_j) exp(-i xi_k alpha_j),   xi_k = 2 pi k / L,

with ``k`` in FFT order covering ``[-N/2, N/2)``.  With this normalisation
Parseval reads ``||f||_{L^2}^2 = L sum_k |c_k|^2``.

A function is *holomorphic* when its coefficients vanish for ``xi > 0``.  The
zero mode belongs to the holomorphic projection ``P``; ``P + Pbar = I``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import BinaryIO

import numpy as np

__all__ = [
    "GridSpec",
    "SpectralField",
    "project_neg",
    "project_pos",
    "conj_mirror",
    "hilbert",
    "frac_deriv",
    "derivative",
    "dealias",
    "lp_block",
    "lp_indices",
    "product",
    "write_field",
    "read_field",
]

HOLOMORPHIC_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid.

    ``n_points`` must be a power of two; ``dealias_fraction`` is the fraction
    of the Nyquist wavenumber retained by :func:`dealias`.
    """

    n_points: int
    length: float
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 2 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 2, got {n!r}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length!r}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(
                f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction!r}"
            )

    @cached_property
    def xi(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.length / self.n_points)

    @cached_property
    def abs_xi(self) -> np.ndarray:
        return np.abs(self.xi)

    @cached_property
    def alpha(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dalpha

    @cached_property
    def centered_alpha(self) -> np.ndarray:
        """Collocation coordinate mapped into ``(-L/2, L/2]``."""
        a = self.alpha.copy()
        a[a > self.length / 2] -= self.length
        return a

    @property
    def dalpha(self) -> float:
        return self.length / self.n_points

    @property
    def nyquist(self) -> float:
        return np.pi * self.n_points / self.length

    @property
    def xi_min(self) -> float:
        return 2.0 * np.pi / self.length

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        # small slack so that |xi| == fraction * nyquist on an exact mode is kept
        return self.abs_xi <= self.dealias_fraction * self.nyquist * (1 + 1e-12)

    @cached_property
    def neg_mask(self) -> np.ndarray:
        """Modes kept by ``P``: ``xi <= 0``."""
        return self.xi <= 0

    @cached_property
    def keep_mask(self) -> np.ndarray:
        """``P`` followed by dealiasing."""
        return self.neg_mask & self.dealias_mask

    # transforms -----------------------------------------------------------
    def to_coeffs(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft(values) / self.n_points

    def to_values(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifft(coeffs) * self.n_points

    def integrate(self, values: np.ndarray) -> complex:
        """Trapezoidal rule over one period (spectrally accurate)."""
        return self.dalpha * np.sum(values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex field known both by collocation values and Fourier coefficients.

    Instances are immutable snapshots; build them with :meth:`from_values` or
    :meth:`from_coeffs` so the two representations stay consistent.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    holomorphic: bool = False

    def __post_init__(self):
        n = self.grid.n_points
        if self.values.shape != (n,) or self.coeffs.shape != (n,):
            raise ValueError("values and coeffs must both have shape (n_points,)")
        self.values.setflags(write=False)
        self.coeffs.setflags(write=False)
        if self.holomorphic and not _is_holomorphic(self.grid, self.coeffs):
            raise ValueError("field flagged holomorphic has positive-frequency content")

    @classmethod
    def from_values(cls, grid: GridSpec, values, holomorphic: bool = False) -> "SpectralField":
        v = np.array(values, dtype=complex)
        return cls(grid, v, grid.to_coeffs(v), holomorphic)

    @classmethod
    def from_coeffs(cls, grid: GridSpec, coeffs, holomorphic: bool = False) -> "SpectralField":
        c = np.array(coeffs, dtype=complex)
        return cls(grid, grid.to_values(c), c, holomorphic)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        z = np.zeros(grid.n_points, dtype=complex)
        return cls(grid, z, z.copy(), True)

    @classmethod
    def from_function(cls, grid: GridSpec, fn, holomorphic: bool = False) -> "SpectralField":
        """Sample ``fn`` on the centered coordinate."""
        return cls.from_values(grid, fn(grid.centered_alpha), holomorphic)

    def is_holomorphic(self, tol: float = HOLOMORPHIC_TOL) -> bool:
        return _is_holomorphic(self.grid, self.coeffs, tol)

    def conj(self) -> "SpectralField":
        return SpectralField.from_values(self.grid, np.conj(self.values))

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.length * np.sum(np.abs(self.coeffs) ** 2)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _combine(self, other, op) -> "SpectralField":
        if isinstance(other, SpectralField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            c = op(self.coeffs, other.coeffs)
            hol = self.holomorphic and other.holomorphic
        else:
            c = self.coeffs.copy()
            c[0] = op(c[0], other)
            hol = self.holomorphic
        return SpectralField.from_coeffs(self.grid, c, hol)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return SpectralField.from_coeffs(self.grid, -self.coeffs, self.holomorphic)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            raise TypeError("use spectral.product for field-field multiplication")
        return SpectralField.from_coeffs(self.grid, self.coeffs * scalar, self.holomorphic)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)


def _is_holomorphic(grid: GridSpec, coeffs: np.ndarray, tol: float = HOLOMORPHIC_TOL) -> bool:
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return True
    return bool(np.max(np.abs(coeffs[grid.xi > 0]), initial=0.0) <= tol * scale)


def _multiplier(f: SpectralField, symbol: np.ndarray, holomorphic: bool) -> SpectralField:
    return SpectralField.from_coeffs(f.grid, f.coeffs * symbol, holomorphic)


def project_neg(f: SpectralField) -> SpectralField:
    """Holomorphic projection ``P``: keep ``xi <= 0`` (zero mode included)."""
    return _multiplier(f, f.grid.neg_mask.astype(float), True)


def project_pos(f: SpectralField) -> SpectralField:
    """Complementary projection ``Pbar = I - P``: keep ``xi > 0`` only."""
    return _multiplier(f, (~f.grid.neg_mask).astype(float), False)


def conj_mirror(f: SpectralField) -> SpectralField:
    """``conj(P[conj f])``: keeps ``xi >= 0``, including the zero mode.

    Used where an expression of the form ``P[x] + Pbar[conj x]`` must be
    exactly real on the torus.
    """
    mask = (f.grid.xi >= 0).astype(float)
    return _multiplier(f, mask, False)


def hilbert(f: SpectralField) -> SpectralField:
    """Hilbert transform with symbol ``-i sgn(xi)`` (zero on the mean)."""
    return _multiplier(f, -1j * np.sign(f.grid.xi), f.holomorphic)


def frac_deriv(f: SpectralField, s: float) -> SpectralField:
    """Fourier multiplier ``|xi|^s``; the identity for ``s == 0``."""
    if s < 0:
        raise ValueError("order must be nonnegative")
    if s == 0:
        return f
    return _multiplier(f, f.grid.abs_xi**s, f.holomorphic)


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    return _multiplier(f, (1j * f.grid.xi) ** order, f.holomorphic)


def dealias(f: SpectralField) -> SpectralField:
    return _multiplier(f, f.grid.dealias_mask.astype(float), f.holomorphic)


def lp_indices(grid: GridSpec) -> range:
    """Dyadic indices ``j`` whose blocks ``[2^j, 2^{j+1})`` meet the grid."""
    lo = int(np.floor(np.log2(grid.xi_min)))
    hi = int(np.floor(np.log2(np.max(grid.abs_xi))))
    return range(lo, hi + 1)


def lp_block(f: SpectralField, j: int) -> SpectralField:
    """Sharp Littlewood-Paley block: ``2^j <= |xi| < 2^(j+1)``."""
    a = f.grid.abs_xi
    lo, hi = 2.0**j, 2.0 ** (j + 1)
    # relative slack keeps exact dyadic modes on the correct side of the cut
    mask = (a >= lo * (1 - 1e-12)) & (a < hi * (1 - 1e-12))
    return _multiplier(f, mask.astype(float), f.holomorphic)


def product(f: SpectralField, g: SpectralField, holomorphic: bool | None = None) -> SpectralField:
    """Collocation product followed by one dealiasing pass."""
    c = f.grid.to_coeffs(f.values * g.values) * f.grid.dealias_mask
    if holomorphic is None:
        holomorphic = f.holomorphic and g.holomorphic
    if holomorphic:
        c = c * f.grid.neg_mask
    return SpectralField.from_coeffs(f.grid, c, holomorphic)


# --------------------------------------------------------------------------
# binary checkpoint records

_MAGIC = b"HWF1"
_HEADER = struct.Struct("<4sQddI")
FLAG_HOLOMORPHIC = 1
FLAG_COMPLEX64 = 2


def write_field(fh: BinaryIO, f: SpectralField, time: float = 0.0, single: bool = False) -> None:
    """Append one field record: header then little-endian coefficients.

    Coefficients are stored as complex128 unless ``single`` is set, in which
    case they are rounded to complex64 (lossy).
    """
    flags = (FLAG_HOLOMORPHIC if f.holomorphic else 0) | (FLAG_COMPLEX64 if single else 0)
    fh.write(_HEADER.pack(_MAGIC, f.grid.n_points, f.grid.length, float(time), flags))
    dtype = "<c8" if single else "<c16"
    fh.write(np.asarray(f.coeffs, dtype=dtype).tobytes())


def read_field(fh: BinaryIO, dealias_fraction: float = 2.0 / 3.0) -> tuple[SpectralField, float]:
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise EOFError("truncated field header")
    magic, n, length, time, flags = _HEADER.unpack(raw)
    if magic != _MAGIC:
        raise ValueError(f"bad field record magic {magic!r}")
    dtype = np.dtype("<c8" if flags & FLAG_COMPLEX64 else "<c16")
    payload = fh.read(n * dtype.itemsize)
    if len(payload) != n * dtype.itemsize:
        raise EOFError("truncated field payload")
    coeffs = np.frombuffer(payload, dtype=dtype).astype(complex)
    grid = GridSpec(int(n), length, dealias_fraction)
    holo = bool(flags & FLAG_HOLOMORPHIC) and _is_holomorphic(grid, coeffs)
    return SpectralField.from_coeffs(grid, coeffs, holo), time
