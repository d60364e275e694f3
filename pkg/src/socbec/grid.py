"""Tensor-product spectral grids with Fourier (periodic) and sine (homogeneous
Dirichlet) bases.

Conventions
-----------
Fourier axis on [lo, hi) with n nodes x_j = lo + j*h, h = (hi-lo)/n:
    f_j = sum_k c_k exp(i*mu_k*(x_j - lo)),  mu_k = 2*pi*k/(hi-lo),
    k = -n/2 .. n/2-1 stored in FFT order.  forward carries 1/n, inverse
    carries no factor, so a pure mode exp(i*mu_k*(x-lo)) has unit coefficient.

Sine axis on (lo, hi) with n-1 interior nodes x_j = lo + j*h, j = 1..n-1:
    f_j = sum_k c_k sin(mu_k*(x_j - lo)),  mu_k = pi*k/(hi-lo), k = 1..n-1.

Parseval: quadrature(|f|^2) = W * sum_k |c_k|^2 with per-axis weight
(hi-lo) for Fourier and (hi-lo)/2 for sine; W is the product over axes
(`Grid.parseval_weight`).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as _fft

FOURIER = "fourier"
SINE = "sine"


@dataclass(frozen=True)
class Axis:
    """One spatial axis: domain [lo, hi], n grid intervals, spectral basis."""

    lo: float
    hi: float
    n: int
    basis: str = FOURIER

    def __post_init__(self):
        if self.basis not in (FOURIER, SINE):
            raise ValueError(f"unknown basis {self.basis!r}")
        if not np.isfinite(self.lo) or not np.isfinite(self.hi):
            raise ValueError("axis bounds must be finite")
        if self.hi <= self.lo:
            raise ValueError(f"axis needs hi > lo, got [{self.lo}, {self.hi}]")
        if self.n < 4:
            raise ValueError(f"axis needs n >= 4, got n={self.n}")
        if self.basis == FOURIER and self.n % 2 != 0:
            raise ValueError(f"Fourier axis needs even n, got n={self.n}")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / self.n

    @property
    def size(self) -> int:
        """Number of stored samples along this axis (interior only for sine)."""
        return self.n if self.basis == FOURIER else self.n - 1

    def nodes(self) -> np.ndarray:
        j = np.arange(self.n) if self.basis == FOURIER else np.arange(1, self.n)
        return self.lo + j * self.h

    def wavenumbers(self) -> np.ndarray:
        if self.basis == FOURIER:
            # FFT order: 0, 1, ..., n/2-1, -n/2, ..., -1
            return 2.0 * np.pi * _fft.fftfreq(self.n, d=self.h)
        return np.pi * np.arange(1, self.n) / self.length

    @property
    def parseval_weight(self) -> float:
        return self.length if self.basis == FOURIER else 0.5 * self.length


class Grid:
    """Tensor product of 1-3 axes with transforms, quadrature, derivatives."""

    def __init__(self, axes):
        axes = tuple(axes)
        if not 1 <= len(axes) <= 3:
            raise ValueError(f"grid supports 1-3 axes, got {len(axes)}")
        if not all(isinstance(a, Axis) for a in axes):
            raise TypeError("grid axes must be Axis instances")
        self.axes = axes
        self.dim = len(axes)
        self.shape = tuple(a.size for a in axes)
        self.spacing = tuple(a.h for a in axes)
        self.cell_volume = float(np.prod(self.spacing))

    def __eq__(self, other):
        return isinstance(other, Grid) and self.axes == other.axes

    def __hash__(self):
        return hash(self.axes)

    def __repr__(self):
        spec = ", ".join(
            f"[{a.lo}, {a.hi}] n={a.n} {a.basis}" for a in self.axes
        )
        return f"Grid({spec})"

    @property
    def is_fourier(self) -> bool:
        return all(a.basis == FOURIER for a in self.axes)

    @property
    def is_sine(self) -> bool:
        return all(a.basis == SINE for a in self.axes)

    @cached_property
    def nodes(self):
        """Per-axis 1D node arrays."""
        return tuple(a.nodes() for a in self.axes)

    @cached_property
    def wavenumbers(self):
        """Per-axis 1D spectral multiplier arrays (mu_k)."""
        return tuple(a.wavenumbers() for a in self.axes)

    def coordinate(self, axis: int) -> np.ndarray:
        """Coordinate of `axis` broadcast over the full grid shape."""
        return self._along(self.nodes[axis], axis) * np.ones(self.shape)

    def meshes(self):
        return tuple(self.coordinate(i) for i in range(self.dim))

    def _along(self, arr: np.ndarray, axis: int) -> np.ndarray:
        shp = [1] * self.dim
        shp[axis] = len(arr)
        return arr.reshape(shp)

    def mu(self, axis: int) -> np.ndarray:
        """Wavenumbers of `axis` shaped for broadcasting over coefficients."""
        return self._along(self.wavenumbers[axis], axis)

    @cached_property
    def mu2(self) -> np.ndarray:
        """|mu|^2 = sum of squared per-axis wavenumbers on the mode grid."""
        out = np.zeros(self.shape)
        for i in range(self.dim):
            out = out + self.mu(i) ** 2
        return out

    @property
    def parseval_weight(self) -> float:
        return float(np.prod([a.parseval_weight for a in self.axes]))

    def _check_shape(self, field: np.ndarray):
        if field.shape != self.shape:
            raise ValueError(
                f"field shape {field.shape} does not match grid shape {self.shape}"
            )

    def forward(self, field: np.ndarray) -> np.ndarray:
        """Physical samples -> spectral coefficients (1/n on each Fourier axis)."""
        field = np.asarray(field)
        self._check_shape(field)
        out = field.astype(np.complex128, copy=True)
        for i, a in enumerate(self.axes):
            if a.basis == FOURIER:
                out = _fft.fft(out, axis=i) / a.n
            else:
                out = _fft.dst(out, type=1, axis=i) / a.n
        return out

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        """Spectral coefficients -> physical samples."""
        coeffs = np.asarray(coeffs)
        self._check_shape(coeffs)
        out = coeffs.astype(np.complex128, copy=True)
        for i, a in enumerate(self.axes):
            if a.basis == FOURIER:
                out = _fft.ifft(out, axis=i) * a.n
            else:
                out = _fft.dst(out, type=1, axis=i) / 2.0
        return out

    def deriv(self, field: np.ndarray, axis: int) -> np.ndarray:
        """Spectral first derivative along `axis`."""
        field = np.asarray(field)
        self._check_shape(field)
        a = self.axes[axis]
        if a.basis == FOURIER:
            c = _fft.fft(field.astype(np.complex128), axis=axis)
            c *= 1j * self._along(self.wavenumbers[axis], axis)
            return _fft.ifft(c, axis=axis)
        # sine series differentiates into a cosine series; evaluate it at the
        # interior nodes through a DCT-I padded with the two boundary zeros
        c = _fft.dst(field.astype(np.complex128), type=1, axis=axis) / a.n
        c *= self._along(self.wavenumbers[axis], axis)
        pad = [(0, 0)] * self.dim
        pad[axis] = (1, 1)
        padded = np.pad(c, pad)
        cos_vals = _fft.dct(padded, type=1, axis=axis) / 2.0
        sl = [slice(None)] * self.dim
        sl[axis] = slice(1, a.n)
        return cos_vals[tuple(sl)]

    def laplacian(self, field: np.ndarray) -> np.ndarray:
        """Spectral Laplacian (all axes)."""
        return self.inverse(-self.mu2 * self.forward(field))

    def quadrature(self, samples: np.ndarray):
        """h^d * sum(samples); sine axes sum interior nodes only."""
        samples = np.asarray(samples)
        self._check_shape(samples)
        total = samples.sum() * self.cell_volume
        if np.iscomplexobj(samples):
            return complex(total)
        return float(total)


def make_grid(axes) -> Grid:
    """Build a Grid from Axis specs, validating the Axis invariants."""
    return Grid(axes)
