import math

import numpy as np
import pytest
from scipy.integrate import quad

from kslogistic.model import InitialDataNorms, ModelParams


def half_integral_quad(rho):
    """∫_0^∞ s^{-1/2} e^{-ρ s} ds by quadrature after s = r^2 (smooth integrand)."""
    val, _ = quad(lambda r: 2.0 * math.exp(-rho * r * r), 0.0, math.inf,
                  epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def kernel_gradient_l1_quad(t=1.0):
    """∫ |∂_x G_t(x)| dx for the 1-d heat kernel, by quadrature."""
    def integrand(x):
        return x / (2.0 * t) * (4.0 * math.pi * t) ** -0.5 * math.exp(-x * x / (4.0 * t))
    val, _ = quad(integrand, 0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * val


def logistic_exact(u0, a, b, gamma, t):
    """Closed-form solution of u' = a u - b u^γ (Bernoulli substitution)."""
    w0 = u0 ** (1.0 - gamma)
    w = b / a + (w0 - b / a) * math.exp(-(gamma - 1.0) * a * t)
    return w ** (1.0 / (1.0 - gamma))


@pytest.fixture
def unit_params():
    return ModelParams(chi=0.0, a=1.0, b=1.0, gamma=1.5, mu=1.0, lam=1.0, dim=2)


@pytest.fixture
def unit_norms():
    return InitialDataNorms(u0_sup=1.0, grad_v0_sup=0.0, v0_sup=1.0, u0_inf=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
