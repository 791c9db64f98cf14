"""Periodic grids, real/spectral fields and spectral differential operators.

Layout
------
A field on ``Grid(dim, n, L)`` is an array of shape ``(n,) * dim`` sampled
at ``x_j = L * i_j / n``. Spectral coefficients use the real-to-complex
layout of ``numpy.fft.rfftn``: every axis but the last holds ``n`` modes in
FFT order, the last axis holds ``n // 2 + 1``. Index ``m`` on an axis maps
to wavenumber ``k = 2π m / L`` with ``m`` in ``[-n/2, n/2)`` (the last axis
stores only ``m >= 0``; the Nyquist index ``n/2`` appears there with a
positive sign). Coefficients are unnormalised, so the zero mode equals
``n**dim * mean(f)``.
"""

import io
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _accel

SNAPSHOT_MAGIC = b"KSFLD1"
_HEADER = struct.Struct("<6sqqdd")


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"grid dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"box length must be positive, got {self.length}")

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def spectral_shape(self):
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def size(self):
        return self.n**self.dim

    @property
    def spacing(self):
        return self.length / self.n

    @property
    def k_max(self):
        """Largest resolved wavenumber magnitude per axis (Nyquist)."""
        return np.pi * self.n / self.length

    @property
    def crossing_time(self):
        """Diffusive box-crossing time L^2 / (4π^2)."""
        return self.length**2 / (4.0 * np.pi**2)

    def coordinates(self):
        """Tuple of broadcastable coordinate arrays, one per axis."""
        x = np.arange(self.n) * self.spacing
        out = []
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = self.n
            out.append(x.reshape(shape))
        return tuple(out)

    def mesh(self):
        return tuple(np.broadcast_to(c, self.shape) for c in self.coordinates())

    @cached_property
    def wavenumbers(self):
        """Broadcastable wavenumber arrays ``k_j`` in the rfftn layout."""
        scale = 2.0 * np.pi / self.length
        ks = []
        for axis in range(self.dim):
            if axis == self.dim - 1:
                m = np.arange(self.n // 2 + 1, dtype=np.float64)
            else:
                m = np.fft.fftfreq(self.n, d=1.0 / self.n)
            shape = [1] * self.dim
            shape[axis] = m.size
            ks.append((scale * m).reshape(shape))
        return tuple(ks)

    @cached_property
    def derivative_wavenumbers(self):
        """Same as ``wavenumbers`` with the Nyquist mode zeroed (odd derivatives)."""
        out = []
        for axis, k in enumerate(self.wavenumbers):
            k = k.copy()
            nyq = self.n // 2
            idx = [0] * self.dim
            idx[axis] = nyq
            k[tuple(idx)] = 0.0
            out.append(k)
        return tuple(out)

    @cached_property
    def k_squared(self):
        k2 = np.zeros(self.spectral_shape)
        for k in self.wavenumbers:
            k2 = k2 + k * k
        return k2

    @cached_property
    def dealias_mask(self):
        """Boolean mask keeping modes with |m_j| <= n/3 on every axis."""
        cutoff = self.n / 3.0
        keep = np.ones(self.spectral_shape, dtype=bool)
        for axis in range(self.dim):
            if axis == self.dim - 1:
                m = np.arange(self.n // 2 + 1)
            else:
                m = np.abs(np.fft.fftfreq(self.n, d=1.0 / self.n))
            shape = [1] * self.dim
            shape[axis] = m.size
            keep &= (m <= cutoff).reshape(shape)
        return keep


def fft(values):
    return np.fft.rfftn(values)


def ifft(coeffs, grid):
    return np.fft.irfftn(coeffs, s=grid.shape, axes=tuple(range(grid.dim)))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field has non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, np.broadcast_to(func(*grid.coordinates()), grid.shape))

    def mean(self):
        return float(self.values.mean())


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self):
        if self.coefficients.shape != self.grid.spectral_shape:
            raise ValueError(
                f"coefficient shape {self.coefficients.shape} != {self.grid.spectral_shape}"
            )


def transform(f):
    return SpectralField(f.grid, fft(f.values))


def inverse_transform(F):
    return ScalarField(F.grid, ifft(F.coefficients, F.grid))


def gradient(f):
    """Spectral gradient, one ScalarField per axis."""
    grid = f.grid
    fh = fft(f.values)
    return [ScalarField(grid, ifft(1j * k * fh, grid)) for k in grid.derivative_wavenumbers]


def divergence(components):
    if not components:
        raise ValueError("divergence needs at least one component")
    grid = components[0].grid
    if len(components) != grid.dim:
        raise ValueError(f"expected {grid.dim} components, got {len(components)}")
    if any(c.grid != grid for c in components):
        raise ValueError("components live on different grids")
    acc = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for k, comp in zip(grid.derivative_wavenumbers, components):
        acc += 1j * k * fft(comp.values)
    return ScalarField(grid, ifft(acc, grid))


def laplacian(f):
    return ScalarField(f.grid, ifft(-f.grid.k_squared * fft(f.values), f.grid))


def dealias(F):
    """2/3-rule truncation of a SpectralField."""
    return SpectralField(F.grid, np.where(F.grid.dealias_mask, F.coefficients, 0.0))


def sup_norm(f):
    return float(np.max(np.abs(f.values)))


def inf_value(f):
    return float(np.min(f.values))


def vector_sup_norm(components):
    """Max over the grid of the Euclidean length of a vector field."""
    return _accel.sup_euclidean([c.values for c in components])


# -- binary snapshots ------------------------------------------------------


def write_snapshot(path_or_file, f, t=0.0):
    """Write ``f`` in the KSFLD1 format (little-endian header + float64 data)."""
    header = _HEADER.pack(SNAPSHOT_MAGIC, f.grid.dim, f.grid.n, float(f.grid.length), float(t))
    payload = np.ascontiguousarray(f.values, dtype="<f8").tobytes()
    if isinstance(path_or_file, io.IOBase):
        path_or_file.write(header + payload)
        return
    with open(path_or_file, "wb") as fh:
        fh.write(header + payload)


def read_snapshot(path_or_file):
    """Return ``(field, t)`` from a KSFLD1 file."""
    if isinstance(path_or_file, io.IOBase):
        raw = path_or_file.read()
    else:
        with open(path_or_file, "rb") as fh:
            raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError("snapshot shorter than its header")
    magic, dim, n, length, t = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    grid = Grid(int(dim), int(n), float(length))
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if data.size != grid.size:
        raise ValueError(f"snapshot holds {data.size} values, grid needs {grid.size}")
    return ScalarField(grid, data.reshape(grid.shape).astype(np.float64)), float(t)
