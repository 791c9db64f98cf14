import math

import numpy as np
import pytest

from kslogistic import integrator as I
from kslogistic import model
from kslogistic import semigroup as S
from kslogistic.errors import DomainError, NumericalAbort
from kslogistic.field import Grid, ScalarField
from kslogistic.model import ModelParams

from conftest import logistic_exact

TWO_PI = 2 * math.pi


def const_state(grid, u, v, t=0.0):
    return I.SimulationState(t, ScalarField.constant(grid, u), ScalarField.constant(grid, v))


def test_step_control_validation():
    with pytest.raises(ValueError):
        I.StepControl(0.0)
    with pytest.raises(ValueError):
        I.StepControl(0.1, scheme="rk4")
    assert I.StepControl(0.1, scheme="ETD1").scheme == "etd1"


@pytest.mark.parametrize("scheme", ["etd1", "etd2rk"])
@pytest.mark.parametrize("dt", [1e-3, 0.05, 0.5])
@pytest.mark.parametrize("chi", [0.0, 3.0])
def test_equilibrium_is_fixed_point(scheme, dt, chi):
    p = ModelParams(chi=chi, a=4.0, b=1.0, gamma=1.5, mu=2.0, lam=4.0)
    u_star, v_star = model.equilibrium(p)
    g = Grid(2, 16, 5.0)
    state = const_state(g, u_star, v_star)
    ctl = I.StepControl(dt, scheme=scheme)
    for _ in range(5):
        state = I.step(state, p, ctl)
    assert np.max(np.abs(state.u.values - u_star)) <= 1e-12 * u_star
    assert np.max(np.abs(state.v.values - v_star)) <= 1e-12 * v_star
    assert state.t == pytest.approx(5 * dt)


def test_nonlinear_rhs_at_equilibrium():
    p = ModelParams(chi=2.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0)
    g = Grid(2, 16, 5.0)
    nu, nv = I.nonlinear_rhs(const_state(g, 1.0, 1.0), p)
    assert np.allclose(nu.values, 0.5, atol=1e-14)
    assert np.allclose(nv.values, 1.0, atol=0)


def test_nonlinear_rhs_without_chemotaxis_is_pointwise(rng):
    p = ModelParams(chi=0.0, a=1.3, b=0.7, gamma=1.8, mu=1.0, lam=1.0)
    g = Grid(1, 64, 3.0)
    u = rng.random(64) + 0.1
    state = I.SimulationState(0.0, ScalarField(g, u), ScalarField.constant(g, 0.0))
    nu, _ = I.nonlinear_rhs(state, p, dealias=False)
    assert np.allclose(nu.values, 1.8 * 1.3 * u - 0.7 * u**1.8, atol=1e-13)


def test_nonlinear_rhs_matches_finite_differences():
    p = ModelParams(chi=1.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0, dim=1)
    errs = []
    for n in (64, 128):
        g = Grid(1, n, TWO_PI)
        x = g.coordinates()[0]
        u = 1 + 0.1 * np.cos(x)
        v = 0.1 * np.cos(x)
        state = I.SimulationState(0.0, ScalarField(g, u), ScalarField(g, v))
        nu, _ = I.nonlinear_rhs(state, p)
        h = g.spacing
        # flux u v_x at half points, then centred divergence
        up = 0.5 * (u + np.roll(u, -1))
        flux = up * (np.roll(v, -1) - v) / h
        div = (flux - np.roll(flux, 1)) / h
        fd = -p.chi * div + p.gamma * p.a * u - p.b * u**p.gamma
        errs.append(np.max(np.abs(nu.values - fd)))
    assert errs[0] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_ode_reduction_against_exact_logistic():
    p = ModelParams(chi=0.7, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0)
    g = Grid(2, 8, 4.0)
    rec = I.run(const_state(g, 0.5, 0.0), p, I.StepControl(1e-3), 2.0, observe_every=0.5)
    u = rec.final_state.u.values
    exact = logistic_exact(0.5, 1.0, 1.0, 1.5, 2.0)
    assert np.ptp(u) == 0.0
    assert abs(u[0, 0] - exact) <= 1e-7


def test_heat_equation_is_exact():
    p = ModelParams(chi=0.0, a=1e-300, b=1e-300, gamma=1.5, mu=1.0, lam=1.0, dim=1)
    g = Grid(1, 32, TWO_PI)
    f = ScalarField.from_function(g, lambda x: 2.0 + np.cos(3 * x))
    state = I.SimulationState(0.0, f, ScalarField.constant(g, 0.0))
    ctl = I.StepControl(0.01, positivity_clip=False)
    for _ in range(10):
        state = I.step(state, p, ctl)
    expected = S.apply(S.semigroup(g, 0.0, 0.1), f)
    assert np.max(np.abs(state.u.values - expected.values)) <= 1e-13


def test_linear_v_step_matches_duhamel():
    # with u frozen at a constant c, v follows v' = -λv + μc exactly per mode
    p = ModelParams(chi=0.0, a=1.0, b=1.0, gamma=1.5, mu=2.0, lam=3.0)
    g = Grid(2, 16, 4.0)
    state = const_state(g, 1.0, 0.0)
    state = I.step(state, p, I.StepControl(0.2))
    expected = 2.0 / 3.0 * (1 - math.exp(-0.6))
    assert np.allclose(state.v.values, expected, rtol=1e-13)


def test_mean_of_v_identity(rng):
    p = ModelParams(chi=0.5, a=1.0, b=1.0, gamma=1.5, mu=1.5, lam=0.8)
    g = Grid(2, 32, 8.0)
    u0 = 0.8 + 0.4 * rng.random(g.shape)
    state = I.SimulationState(0.0, ScalarField(g, u0), ScalarField.constant(g, 0.2))
    dt = 1e-3
    means_u, means_v = [state.u.mean()], [state.v.mean()]
    for _ in range(200):
        state = I.step(state, p, I.StepControl(dt))
        means_u.append(state.u.mean())
        means_v.append(state.v.mean())
    mu_, mv = np.array(means_u), np.array(means_v)
    lhs = (mv[2:] - mv[:-2]) / (2 * dt)
    rhs = p.mu * mu_[1:-1] - p.lam * mv[1:-1]
    assert np.max(np.abs(lhs - rhs)) <= 1e-5


def test_stability_ceiling_is_enforced():
    p = ModelParams(chi=0.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0)
    g = Grid(2, 16, 5.0)
    state = const_state(g, 1.0, 0.0)
    norms = I.initial_norms(state)
    ceiling = I.stability_ceiling(p, norms, g)
    # c_bar = 5: 0.5 / (0.5 + 1.5 sqrt(5))
    assert ceiling == pytest.approx(0.5 / (0.5 + 1.5 * math.sqrt(5.0)))
    with pytest.raises(DomainError):
        I.run(state, p, I.StepControl(2 * ceiling), 1.0)
    I.run(state, p, I.StepControl(2 * ceiling), 0.5, enforce_ceiling=False)


def test_run_with_no_steps():
    p = ModelParams(chi=0.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0)
    g = Grid(2, 16, 5.0)
    rec = I.run(const_state(g, 1.0, 1.0, t=3.0), p, I.StepControl(0.01), 3.0)
    assert len(rec) == 1 and rec["t"][0] == 3.0
    with pytest.raises(ValueError):
        I.run(const_state(g, 1.0, 1.0, t=3.0), p, I.StepControl(0.01), 2.0)


def test_run_at_equilibrium_records_no_deviation():
    p = ModelParams(chi=1.0, a=2.0, b=1.0, gamma=1.5, mu=1.0, lam=2.0)
    u_star, v_star = model.equilibrium(p)
    g = Grid(2, 16, 5.0)
    rec = I.run(const_state(g, u_star, v_star), p, I.StepControl(0.01), 1.0)
    assert len(rec) == 11
    assert np.allclose(rec["t"], np.linspace(0, 1, 11))
    assert rec["dev_u"].max() <= 1e-10 and rec["dev_v"].max() <= 1e-10
    assert rec["sup_grad_v"].max() == 0.0 and not rec.clip_flagged


def test_run_samples_final_step_off_stride():
    p = ModelParams(chi=0.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0)
    g = Grid(1, 16, 5.0)
    rec = I.run(const_state(g, 1.0, 1.0), p, I.StepControl(0.1), 0.35, observe_every=0.2)
    assert np.allclose(rec["t"], [0.0, 0.2, 0.4])


def test_step_aborts_on_overflow():
    p = ModelParams(chi=0.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0)
    g = Grid(1, 16, 5.0)
    vals = np.full(16, 1e308)
    state = I.SimulationState(0.0, ScalarField(g, vals), ScalarField.constant(g, 0.0))
    with pytest.raises(NumericalAbort):
        I.step(state, p, I.StepControl(0.1))


def test_run_abort_carries_partial_record():
    # a strongly aggregating, deliberately under-resolved run overflows
    p = ModelParams(chi=1e3, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0, dim=1)
    g = Grid(1, 16, TWO_PI)
    u = ScalarField.from_function(g, lambda x: 1.0 + 0.5 * np.cos(x))
    v = ScalarField.from_function(g, lambda x: np.cos(x))
    state = I.SimulationState(0.0, u, v)
    with pytest.raises(NumericalAbort) as info:
        I.run(state, p, I.StepControl(0.05, positivity_clip=False), 100.0,
              enforce_ceiling=False, observe_every=0.05)
    rec = info.value.record
    assert rec is not None and len(rec) >= 1
    assert rec["t"][-1] <= info.value.t
    assert rec.aborted_at == info.value.t


def test_positivity_clip_flags_record():
    p = ModelParams(chi=3.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0, dim=1)
    g = Grid(1, 16, TWO_PI)
    u = ScalarField.from_function(g, lambda x: 0.05 + 0.05 * np.cos(x))
    v = ScalarField.from_function(g, lambda x: 2.0 * np.cos(2 * x))
    rec = I.run(I.SimulationState(0.0, u, v), p, I.StepControl(0.01), 0.3,
                enforce_ceiling=False)
    assert rec["inf_u"].min() >= 0.0
    assert rec["clipped_mass"].max() > 0.0 and rec.clip_flagged


def test_snapshot_writer(tmp_path):
    from kslogistic.field import read_snapshot

    p = ModelParams(chi=0.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0)
    g = Grid(2, 8, 5.0)
    writer = I.SnapshotWriter(str(tmp_path), 0.5)
    I.run(const_state(g, 1.0, 1.0), p, I.StepControl(0.1), 1.0, observers=[writer])
    assert writer.count == 3
    f, t = read_snapshot(tmp_path / "u_00002.ksfld")
    assert t == pytest.approx(1.0) and f.grid == g
