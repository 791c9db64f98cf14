"""Exponential time differencing for the chemotaxis system.

The u-equation is advanced in the shifted form

    u_t = (Δ - (γ-1)a) u + [ -χ ∇·(u∇v) + γ a u - b u^γ ]

so that the exactly integrated linear part is the same damped heat
semigroup that appears in the variation-of-constants formula; the
v-equation uses Δ - λ with forcing μu. Each step is one Duhamel step
whose integral is approximated by φ-function weights (ETD1), optionally
followed by the Cox-Matthews corrector (ETD2RK).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from . import model
from .analysis import TimeSeriesRecord
from .errors import DomainError, NumericalAbort
from .field import ScalarField, fft, ifft, write_snapshot
from .semigroup import duhamel_weights

SCHEMES = ("etd1", "etd2rk")
CLIP_FLAG_RATIO = 1e-8


@dataclass(frozen=True)
class SimulationState:
    t: float
    u: ScalarField
    v: ScalarField

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValueError("u and v live on different grids")

    @property
    def grid(self):
        return self.u.grid


@dataclass(frozen=True)
class StepControl:
    dt: float
    scheme: str = "etd2rk"
    positivity_clip: bool = True
    dealias: bool = True

    def __post_init__(self):
        if not self.dt > 0 or not math.isfinite(self.dt):
            raise ValueError(f"dt must be positive, got {self.dt}")
        scheme = self.scheme.lower()
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        object.__setattr__(self, "scheme", scheme)


def initial_norms(state):
    """Sup/inf norms of the initial datum in the form the bounds consume."""
    grid = state.grid
    vh = fft(state.v.values)
    grads = [ifft(1j * k * vh, grid) for k in grid.derivative_wavenumbers]
    return model.InitialDataNorms(
        u0_sup=float(np.max(np.abs(state.u.values))),
        grad_v0_sup=_accel.sup_euclidean(grads),
        v0_sup=float(np.max(np.abs(state.v.values))),
        u0_inf=max(float(np.min(state.u.values)), 0.0),
    )


def stability_ceiling(params, norms, grid):
    """Largest admissible fixed step for the given data and resolution."""
    cb = model.c_bar(params, norms)
    rate = (
        (params.gamma - 1.0) * params.a
        + params.chi * norms.grad_v0_sup * grid.k_max
        + params.b * params.gamma * cb ** (params.gamma - 1.0)
    )
    return 0.5 / rate


def check_step(ctl, params, norms, grid):
    ceiling = stability_ceiling(params, norms, grid)
    if ctl.dt > ceiling:
        raise DomainError(f"dt={ctl.dt} exceeds the stability ceiling {ceiling:.6g}")
    return ceiling


class _Propagator:
    """Spectral-space stepping machinery for one (grid, params, ctl)."""

    def __init__(self, grid, params, ctl):
        self.grid = grid
        self.params = params
        self.ctl = ctl
        self.shift_u = (params.gamma - 1.0) * params.a
        self.growth = params.gamma * params.a
        self.eu, self.w1u, self.w2u = duhamel_weights(grid, self.shift_u, ctl.dt)
        self.ev, self.w1v, self.w2v = duhamel_weights(grid, params.lam, ctl.dt)
        self.dk = grid.derivative_wavenumbers
        self.mask = grid.dealias_mask if ctl.dealias else None

    def nonlinear(self, u, uh, vh):
        """Spectral forcing ``(Nu_hat, Nv_hat)`` at real-space ``u``."""
        grid = self.grid
        p = self.params
        src = _accel.logistic_source(u, self.growth, p.b, p.gamma)
        nu = fft(src)
        if p.chi != 0.0:
            div = np.zeros(grid.spectral_shape, dtype=np.complex128)
            for k in self.dk:
                dv = ifft(1j * k * vh, grid)
                div += 1j * k * fft(u * dv)
            nu -= p.chi * div
        if self.mask is not None:
            nu *= self.mask
        return nu, p.mu * uh

    def advance(self, u, uh, vh):
        """One step; returns ``(u, uh, vh, clipped_density)``."""
        grid = self.grid
        nu0, nv0 = self.nonlinear(u, uh, vh)
        uh1 = _accel.etd_update(self.eu, self.w1u, uh, nu0)
        vh1 = _accel.etd_update(self.ev, self.w1v, vh, nv0)
        if self.ctl.scheme == "etd2rk":
            ua = ifft(uh1, grid)
            nu1, nv1 = self.nonlinear(ua, uh1, vh1)
            uh1 = _accel.etd_correct(uh1, self.w2u, nu1, nu0)
            vh1 = _accel.etd_correct(vh1, self.w2v, nv1, nv0)
        u1 = ifft(uh1, grid)
        clipped = 0.0
        if self.ctl.positivity_clip:
            clipped = _accel.clip_negative(u1) / grid.size
            if clipped > 0.0:
                uh1 = fft(u1)
        return u1, uh1, vh1, clipped


def _require_finite(t, *arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericalAbort(t)


def nonlinear_rhs(state, params, dealias=True):
    """Real-space forcing terms ``(Nu, Nv)`` of the shifted system.

    ``Nu = -χ∇·(u∇v) + γ a u - b max(u,0)^γ`` (dealiased if requested) and
    ``Nv = μ u``.
    """
    grid = state.grid
    prop = _Propagator(grid, params, StepControl(1.0, dealias=dealias))
    u = state.u.values
    with np.errstate(over="ignore", invalid="ignore"):
        nu, _ = prop.nonlinear(u, fft(u), fft(state.v.values))
        nu_real = ifft(nu, grid)
    _require_finite(state.t, nu_real)
    return ScalarField(grid, nu_real), ScalarField(grid, params.mu * u)


def step(state, params, ctl):
    """Advance ``state`` by one step of ``ctl.dt``."""
    grid = state.grid
    prop = _Propagator(grid, params, ctl)
    u = np.array(state.u.values)
    with np.errstate(over="ignore", invalid="ignore"):
        u1, _, vh1, _ = prop.advance(u, fft(u), fft(state.v.values))
        v1 = ifft(vh1, grid)
    t1 = state.t + ctl.dt
    _require_finite(state.t, u1, v1)
    return SimulationState(t1, ScalarField(grid, u1), ScalarField(grid, v1))


class SnapshotWriter:
    """Observer that dumps u and v in KSFLD1 format every ``every`` time units."""

    def __init__(self, directory, every):
        self.directory = directory
        self.every = float(every)
        self._next = 0.0
        self.count = 0
        self.paths = []

    def __call__(self, t, u, v, grid):
        if t + 1e-12 < self._next:
            return
        for name, values in (("u", u), ("v", v)):
            path = f"{self.directory}/{name}_{self.count:05d}.ksfld"
            write_snapshot(path, ScalarField(grid, values), t)
            self.paths.append(path)
        self.count += 1
        self._next = self.count * self.every


def _observe(t, u, vh, grid, params, norms, u_star, v_star, clipped):
    v = ifft(vh, grid)
    grads = [ifft(1j * k * vh, grid) for k in grid.derivative_wavenumbers]
    lap = ifft(-grid.k_squared * vh, grid)
    bound_v, bound_grad = model.v_bounds(params, norms)
    return (
        t,
        float(np.max(np.abs(u))),
        float(np.min(u)),
        float(np.max(np.abs(v))),
        float(np.min(v)),
        _accel.sup_euclidean(grads),
        float(np.max(np.abs(lap))),
        _accel.sup_abs_deviation(u, u_star),
        _accel.sup_abs_deviation(v, v_star),
        clipped,
        model.explicit_u_bound(params, norms, t),
        bound_v,
        bound_grad,
    ), v


def run(
    initial,
    params,
    ctl,
    t_end,
    observers=(),
    observe_every=0.1,
    enforce_ceiling=True,
):
    """Integrate from ``initial`` to ``t_end`` with fixed steps.

    Returns a ``TimeSeriesRecord`` sampled every ``observe_every`` (rounded
    to a whole number of steps) plus the final time. Each observer is
    called as ``obs(t, u, v, grid)`` with read-only arrays at every
    sample. On non-finite values ``NumericalAbort`` is raised carrying the
    partial record.
    """
    if t_end < initial.t:
        raise ValueError(f"t_end={t_end} precedes the initial time {initial.t}")
    grid = initial.grid
    norms = initial_norms(initial)
    if enforce_ceiling:
        check_step(ctl, params, norms, grid)
    u_star, v_star = model.equilibrium(params)
    prop = _Propagator(grid, params, ctl)

    n_steps = max(0, math.ceil((t_end - initial.t) / ctl.dt - 1e-9))
    stride = max(1, round(observe_every / ctl.dt))
    record = TimeSeriesRecord(params=params, norms=norms)

    u = np.array(initial.u.values)
    uh = fft(u)
    vh = fft(initial.v.values)
    pending_clip = 0.0
    mean_u = max(float(u.mean()), 0.0)

    def sample(t):
        row, v = _observe(t, u, vh, grid, params, norms, u_star, v_star, pending_clip)
        record.append(row)
        for obs in observers:
            obs(t, u, v, grid)

    t = initial.t
    sample(t)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n_steps + 1):
            u_new, uh_new, vh_new, clipped = prop.advance(u, uh, vh)
            if not (np.all(np.isfinite(uh_new)) and np.all(np.isfinite(vh_new))):
                record.aborted_at = t
                raise NumericalAbort(
                    t, record=record,
                    diagnostics={"sup_u": float(np.max(np.abs(u))), "step": i},
                )
            u, uh, vh = u_new, uh_new, vh_new
            t = initial.t + i * ctl.dt
            if clipped > 0.0:
                pending_clip += clipped
                mean_u = max(float(u.mean()), 0.0)
                if clipped > CLIP_FLAG_RATIO * mean_u:
                    record.clip_flagged = True
            if i % stride == 0 or i == n_steps:
                sample(t)
                pending_clip = 0.0
    record.final_state = SimulationState(
        t, ScalarField(grid, u), ScalarField(grid, ifft(vh, grid))
    )
    return record
