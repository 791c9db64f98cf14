"""PDE parameters and the closed-form constants used by the a-priori bounds.

System on R^N (approximated by a periodic box elsewhere in the package)::

    u_t = Δu - χ ∇·(u ∇v) + a u - b u^γ
    v_t = Δv + μ u - λ v

Every constant below is an explicit algebraic expression. The integrals
of the form ∫_0^∞ s^{-1/2} e^{-ρ s} ds that appear in the estimates are
evaluated with their closed form sqrt(π/ρ); quadrature is only used as an
oracle in the tests.
"""

import math
from dataclasses import asdict, dataclass, replace

from .errors import DomainError

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class ModelParams:
    chi: float
    a: float
    b: float
    gamma: float
    mu: float
    lam: float
    dim: int = 2

    def __post_init__(self):
        for name in ("chi", "a", "b", "gamma", "mu", "lam"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.chi < 0:
            raise DomainError(f"chi must be >= 0, got {self.chi}")
        for name in ("a", "b", "mu", "lam"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.gamma <= 1:
            raise DomainError(f"gamma must be > 1, got {self.gamma}")
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")

    def with_chi(self, chi):
        return replace(self, chi=float(chi))

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class InitialDataNorms:
    u0_sup: float
    grad_v0_sup: float
    v0_sup: float = 0.0
    u0_inf: float = 0.0

    def __post_init__(self):
        for name in ("u0_sup", "grad_v0_sup", "v0_sup", "u0_inf"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
        if self.u0_inf > self.u0_sup:
            raise DomainError(
                f"u0_inf={self.u0_inf} exceeds u0_sup={self.u0_sup}"
            )


@dataclass(frozen=True)
class DerivedConstants:
    u_star: float
    v_star: float
    c_bar: float
    c_N: float
    c1: float
    c2: float
    c3: float
    c4: float
    chi0: float
    chi1: float
    chi_star: float
    sigma: float
    epsilon: float
    xi: float
    c_tilde: float
    c_vtilde: float
    smallness: float
    decay_in_scope: bool

    def as_dict(self):
        return asdict(self)


def equilibrium(params):
    """Positive constant steady state ``(u*, v*)``."""
    u_star = (params.a / params.b) ** (1.0 / (params.gamma - 1.0))
    return u_star, params.mu / params.lam * u_star


def _damping_power(params):
    # b^{1/(γ-1)} and a^{(2-γ)/(γ-1)}, shared by the decay constants
    g1 = params.gamma - 1.0
    return params.b ** (1.0 / g1), params.a ** ((2.0 - params.gamma) / g1)


def gamma_half_integral(rho):
    """Closed form of ∫_0^∞ s^{-1/2} e^{-ρ s} ds = sqrt(π/ρ)."""
    if not rho > 0 or not math.isfinite(rho):
        raise DomainError(f"decay rate must be positive and finite, got {rho!r}")
    return math.sqrt(math.pi / rho)


def gradient_kernel_constant(dim):
    """Constant in ‖∇e^{tΔ}f‖∞ ≤ C t^{-1/2} ‖f‖∞ for the Euclidean gradient.

    Each component of ∇G_t has L¹ norm (πt)^{-1/2}; combining N components
    in the Euclidean norm gives sqrt(N/π).
    """
    return math.sqrt(dim) / SQRT_PI


def integral_constants(params, sigma=0.0):
    """Return ``(c1, c2, c3, c4)``.

    ``sigma == 0`` skips the decay-rate constants and reports them as
    ``nan``.
    """
    g1 = params.gamma - 1.0
    c1 = gamma_half_integral(params.lam)
    c2 = params.dim / SQRT_PI * gamma_half_integral(g1 * params.a)
    if sigma == 0:
        return c1, c2, math.nan, math.nan
    rate3 = params.lam - sigma * g1
    if rate3 <= 0:
        raise DomainError(f"c3 needs lambda - sigma*(gamma-1) > 0, got {rate3}")
    rate4 = g1 * (params.a - sigma)
    if rate4 <= 0:
        raise DomainError(f"c4 needs a - sigma > 0, got a - sigma = {params.a - sigma}")
    return c1, c2, gamma_half_integral(rate3), gamma_half_integral(rate4)


def c_bar(params, norms):
    u_star, _ = equilibrium(params)
    return 2.0 * norms.u0_sup + 3.0 * u_star


def v_bounds(params, norms):
    """Uniform-in-time bounds for ‖v‖∞ and ‖∇v‖∞ while ‖u‖∞ ≤ c_bar."""
    cb = c_bar(params, norms)
    c1 = gamma_half_integral(params.lam)
    v_sup = norms.v0_sup + params.mu / params.lam * cb
    grad_sup = norms.grad_v0_sup + params.mu * cb * gradient_kernel_constant(params.dim) * c1
    return v_sup, grad_sup


def explicit_u_bound(params, norms, t):
    """e^{-(γ-1)a t} ‖u0‖∞ + (3/2) u*; valid for χ < χ0."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    u_star, _ = equilibrium(params)
    return math.exp(-(params.gamma - 1.0) * params.a * t) * norms.u0_sup + 1.5 * u_star


def default_sigma(params):
    return 0.5 * min(params.a / 2.0, params.lam / (params.gamma - 1.0))


def default_xi(params, floor):
    u_star, _ = equilibrium(params)
    return min(floor, 0.999 * u_star / 4.0)


def check_decay_ranges(params, sigma, epsilon, strict=True):
    if strict and not params.gamma < 2:
        raise DomainError(f"decay constants require gamma < 2, got {params.gamma}")
    upper = min(params.a / 2.0, params.lam / (params.gamma - 1.0))
    if not 0 < sigma < upper:
        raise DomainError(f"sigma must lie in (0, {upper:.6g}), got {sigma}")
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")


def c_tilde(params, sigma, epsilon):
    b_pow, a_pow = _damping_power(params)
    return epsilon * a_pow * (params.a - sigma) / (2.0 * b_pow)


def smallness_threshold(params, sigma, epsilon):
    """Level ‖u - u*‖∞ must reach before exponential decay is guaranteed."""
    b_pow, a_pow = _damping_power(params)
    return epsilon**2 * a_pow * (params.a - 2.0 * sigma) / (4.0 * b_pow)


def chi0(params, norms):
    u_star, _ = equilibrium(params)
    cb = c_bar(params, norms)
    _, c2, _, _ = integral_constants(params)
    _, grad_bound = v_bounds(params, norms)
    return u_star / (2.0 * cb * c2 * grad_bound)


def chi1(params, norms, xi):
    u_star, _ = equilibrium(params)
    if not 0 < xi < u_star / 4.0:
        raise DomainError(f"xi must lie in (0, {u_star / 4.0:.6g}), got {xi}")
    _, grad_bound = v_bounds(params, norms)
    tail = gamma_half_integral(params.a * (params.gamma - 1.0))
    return SQRT_PI * xi / (4.0 * params.dim * (2.0 * u_star - xi) * grad_bound * tail)


def c_vtilde(params, norms, sigma, epsilon):
    _, _, c3, _ = integral_constants(params, sigma)
    _, grad_bound = v_bounds(params, norms)
    c_N = gradient_kernel_constant(params.dim)
    return grad_bound + params.mu * c_tilde(params, sigma, epsilon) * c_N * c3


def chi_decay_term(params, norms, sigma, epsilon):
    """Third entry of the min defining χ*."""
    u_star, _ = equilibrium(params)
    b_pow, a_pow = _damping_power(params)
    _, _, _, c4 = integral_constants(params, sigma)
    ct = c_tilde(params, sigma, epsilon)
    cv = c_vtilde(params, norms, sigma, epsilon)
    num = epsilon**2 * a_pow * sigma * SQRT_PI
    return num / (4.0 * b_pow * params.dim * cv * c4 * (ct + u_star))


def chi_thresholds(params, norms, sigma, epsilon, xi, strict=True):
    """Return ``(chi0, chi1, chi_star)``.

    With ``strict=False`` a logistic exponent γ ≥ 2 is accepted; the
    numbers are still computed but lie outside the range where the decay
    estimate was derived (see ``DerivedConstants.decay_in_scope``).
    """
    check_decay_ranges(params, sigma, epsilon, strict=strict)
    x0 = chi0(params, norms)
    x1 = chi1(params, norms, xi)
    x3 = chi_decay_term(params, norms, sigma, epsilon)
    return x0, x1, min(x0, x1, x3)


def derive_constants(params, norms, sigma=None, epsilon=0.5, xi=None):
    """Evaluate every constant for one parameter set and initial datum."""
    u_star, v_star = equilibrium(params)
    if sigma is None:
        sigma = default_sigma(params)
    if xi is None:
        xi = default_xi(params, norms.u0_inf if norms.u0_inf > 0 else u_star)
    in_scope = params.gamma < 2
    c1, c2, c3, c4 = integral_constants(params, sigma)
    x0, x1, xs = chi_thresholds(params, norms, sigma, epsilon, xi, strict=False)
    return DerivedConstants(
        u_star=u_star,
        v_star=v_star,
        c_bar=c_bar(params, norms),
        c_N=gradient_kernel_constant(params.dim),
        c1=c1,
        c2=c2,
        c3=c3,
        c4=c4,
        chi0=x0,
        chi1=x1,
        chi_star=xs,
        sigma=sigma,
        epsilon=epsilon,
        xi=xi,
        c_tilde=c_tilde(params, sigma, epsilon),
        c_vtilde=c_vtilde(params, norms, sigma, epsilon),
        smallness=smallness_threshold(params, sigma, epsilon),
        decay_in_scope=in_scope,
    )
