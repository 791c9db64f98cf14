"""Shifted heat semigroups e^{t(Δ - ρI)} as diagonal Fourier multipliers.

On the periodic box the semigroup is exact: mode k is scaled by
e^{-(|k|^2 + ρ) t}. The same multipliers give the Duhamel weights
∫_0^t e^{s(Δ - ρI)} ds used by the exponential integrators.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _accel
from .field import ScalarField, fft, ifft


@dataclass(frozen=True, eq=False)
class SemigroupOperator:
    grid: object
    rho: float
    t: float
    multiplier: np.ndarray

    @property
    def mean_factor(self):
        return math.exp(-self.rho * self.t)


@lru_cache(maxsize=64)
def semigroup(grid, rho, t):
    """Cached operator for e^{t(Δ - ρI)} on ``grid``."""
    rho = float(rho)
    t = float(t)
    if t < 0:
        raise ValueError(f"semigroup time must be >= 0, got {t}")
    if rho < 0:
        raise ValueError(f"shift must be >= 0, got {rho}")
    mult = np.exp(-(grid.k_squared + rho) * t)
    mult.setflags(write=False)
    return SemigroupOperator(grid, rho, t, mult)


@lru_cache(maxsize=64)
def duhamel_weights(grid, rho, dt):
    """Per-mode ``(E, W1, W2)`` for one exponential step of length ``dt``.

    With ``L = -(|k|^2 + ρ)``: ``E = e^{L dt}``, ``W1 = dt φ1(L dt)`` (the
    exact integral of the semigroup over ``[0, dt]``) and
    ``W2 = dt φ2(L dt)``.
    """
    z = -(grid.k_squared + float(rho)) * float(dt)
    phi1, phi2 = _accel.phi12(z)
    weights = (np.exp(z), dt * phi1, dt * phi2)
    for w in weights:
        w.setflags(write=False)
    return weights


def _check(op, grid, strict):
    if op.grid != grid:
        raise ValueError("field and operator live on different grids")
    if strict and op.t <= 0:
        raise ValueError(f"gradient/divergence forms need t > 0, got {op.t}")


def apply(op, f):
    """e^{t(Δ - ρI)} f."""
    _check(op, f.grid, strict=False)
    if op.t == 0:
        return f
    return ScalarField(f.grid, ifft(op.multiplier * fft(f.values), f.grid))


def apply_gradient(op, f):
    """∇ e^{t(Δ - ρI)} f, one component per axis."""
    _check(op, f.grid, strict=True)
    fh = op.multiplier * fft(f.values)
    return [
        ScalarField(f.grid, ifft(1j * k * fh, f.grid))
        for k in f.grid.derivative_wavenumbers
    ]


def apply_divergence(op, components):
    """e^{t(Δ - ρI)} ∇·F for a vector field given as a list of components."""
    grid = op.grid
    if len(components) != grid.dim:
        raise ValueError(f"expected {grid.dim} components, got {len(components)}")
    for comp in components:
        _check(op, comp.grid, strict=True)
    acc = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for k, comp in zip(grid.derivative_wavenumbers, components):
        acc += 1j * k * fft(comp.values)
    return ScalarField(grid, ifft(op.multiplier * acc, grid))


def sup_bound(rho, t):
    """‖e^{t(Δ-ρI)}‖ on L^∞."""
    return math.exp(-rho * t)


def gradient_bound(dim, rho, t):
    """Bound factor for the Euclidean gradient of the semigroup."""
    return math.sqrt(dim / math.pi) * t**-0.5 * math.exp(-rho * t)


def divergence_bound(dim, rho, t):
    return dim / math.sqrt(math.pi) * t**-0.5 * math.exp(-rho * t)
