"""Initial-data generators and χ resolution for scenarios."""

import numpy as np

from .. import model
from ..errors import ConfigError
from ..field import ScalarField, fft, ifft
from ..integrator import SimulationState, initial_norms


def smooth_noise(grid, rng, length):
    """Gaussian-filtered white noise rescaled to [0, 1]."""
    noise = rng.standard_normal(grid.shape)
    filt = np.exp(-0.5 * grid.k_squared * length**2)
    smooth = ifft(filt * fft(noise), grid)
    lo, hi = smooth.min(), smooth.max()
    if hi - lo <= 0:
        return np.zeros(grid.shape)
    return (smooth - lo) / (hi - lo)


def random_band(grid, rng, lo, hi, length):
    """Smooth random field with values in ``[lo, hi]`` (both attained)."""
    unit = smooth_noise(grid, rng, length)
    return np.clip(lo + (hi - lo) * unit, lo, hi)


def bump(grid, center, width, height, floor):
    center = center if center is not None else (grid.length / 2.0,) * grid.dim
    r2 = np.zeros(grid.shape)
    for x, c in zip(grid.coordinates(), center):
        d = np.abs(x - c) % grid.length
        d = np.minimum(d, grid.length - d)
        r2 = r2 + d * d
    return floor + height * np.exp(-r2 / (2.0 * width**2))


def make_initial(config):
    """Deterministic initial state for ``config`` (seeded by ``config.seed``)."""
    grid = config.grid
    spec = config.initial
    rng = np.random.default_rng(config.seed)
    u_star, v_star = model.equilibrium(config.params)
    if spec.kind == "constant":
        u = np.full(grid.shape, spec.value)
    elif spec.kind == "equilibrium":
        u = np.full(grid.shape, u_star)
    elif spec.kind == "perturbed_equilibrium":
        unit = smooth_noise(grid, rng, spec.smoothing)
        u = u_star * (1.0 + spec.amplitude * (2.0 * unit - 1.0))
    elif spec.kind == "random_band":
        u = random_band(grid, rng, spec.min, spec.max, spec.smoothing)
    elif spec.kind == "bump":
        u = bump(grid, spec.center, spec.width, spec.height, spec.floor)
    else:
        raise ConfigError(f"unknown initial kind {spec.kind!r}")

    if spec.v_kind == "zero":
        v = np.zeros(grid.shape)
    elif spec.v_kind == "equilibrium":
        v = np.full(grid.shape, v_star)
    else:
        v = random_band(grid, rng, spec.v_min, spec.v_max, spec.smoothing)
    return SimulationState(0.0, ScalarField(grid, u), ScalarField(grid, v))


def resolve(config, state=None):
    """Return ``(params, norms, state)`` with χ fixed by the config's rule.

    ``chi_over_chi0`` and ``chi_over_chi_star`` scale the thresholds
    computed from the actual initial datum; the persistence parameter ξ
    defaults to min(inf u0, 0.999 u*/4).
    """
    if state is None:
        state = make_initial(config)
    norms = initial_norms(state)
    params = config.params
    kind, value = config.chi_rule
    if kind == "chi0":
        params = params.with_chi(value * model.chi0(params, norms))
    elif kind == "chi_star":
        if norms.u0_inf <= 0 and config.xi is None:
            raise ConfigError("chi_over_chi_star needs inf u0 > 0 or an explicit analysis.xi")
        consts = constants_for(config, params, norms)
        params = params.with_chi(value * consts.chi_star)
    return params, norms, state


def constants_for(config, params, norms):
    return model.derive_constants(
        params, norms, sigma=config.sigma, epsilon=config.epsilon, xi=config.xi
    )
