"""Checks on simulation records.

Everything here is pure post-processing: boundedness margins, the
persistence floor, exponential decay fits, the scalar fixed-point
recursion that controls the eventual distance to equilibrium, and an
audit of the quadratic bound on the shifted logistic source.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import model
from .errors import DomainError

COLUMNS = (
    "t",
    "sup_u",
    "inf_u",
    "sup_v",
    "inf_v",
    "sup_grad_v",
    "sup_lap_v",
    "dev_u",
    "dev_v",
    "clipped_mass",
    "bound_u",
    "bound_v",
    "bound_grad_v",
)

PDE_TOL = 1e-2
ALGEBRA_TOL = 1e-10


class TimeSeriesRecord:
    """Per-sample diagnostics of one run.

    Columns are listed in ``COLUMNS``; ``record["sup_u"]`` returns a numpy
    array. ``clip_flagged`` is set when a single step clipped more than
    1e-8 of the mean density, ``aborted_at`` when integration stopped on
    non-finite values.
    """

    def __init__(self, params=None, norms=None, rows=None):
        self.params = params
        self.norms = norms
        self._rows = list(rows or [])
        self.clip_flagged = False
        self.aborted_at = None
        self.final_state = None

    def append(self, row):
        if len(row) != len(COLUMNS):
            raise ValueError(f"row has {len(row)} entries, expected {len(COLUMNS)}")
        if self._rows and not row[0] > self._rows[-1][0]:
            raise ValueError("record times must be strictly increasing")
        self._rows.append(tuple(float(x) for x in row))

    def __len__(self):
        return len(self._rows)

    def __getitem__(self, name):
        idx = COLUMNS.index(name)
        return np.array([r[idx] for r in self._rows])

    @property
    def rows(self):
        return list(self._rows)

    def as_array(self):
        return np.array(self._rows, dtype=np.float64).reshape(-1, len(COLUMNS))

    @classmethod
    def from_columns(cls, params=None, norms=None, **columns):
        """Build a record from column arrays; missing columns are zero."""
        n = len(columns["t"])
        data = [np.asarray(columns.get(c, np.zeros(n)), dtype=float) for c in COLUMNS]
        rec = cls(params, norms)
        for row in zip(*data):
            rec.append(row)
        return rec


@dataclass
class VerificationReport:
    check: str
    passed: bool
    worst_margin: float
    t_worst: float = math.nan
    tolerance: float = 0.0
    details: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    prefactor: float
    window: tuple
    residual_rms: float
    theoretical_rate: float
    samples: int


@dataclass(frozen=True)
class LnSequence:
    xi: float
    beta: float
    iterates: tuple
    l_tilde: float
    converged: bool


def _params_echo(params):
    return params.as_dict() if params is not None else {}


def check_boundedness(record, params, norms, tol_u=PDE_TOL, tol_v=PDE_TOL):
    """Compare a record with the uniform bounds valid for χ < χ0.

    Four margins per row (bound minus observed): the time-dependent u
    bound, c_bar/2, the v bound and the ∇v bound. The report's margin is
    the smallest one, measured against its own tolerance.
    """
    if len(record) == 0:
        raise ValueError("empty record")
    cb = model.c_bar(params, norms)
    v_bound, grad_bound = model.v_bounds(params, norms)
    t = record["t"]
    sup_u = record["sup_u"]
    bound_u = np.array([model.explicit_u_bound(params, norms, ti) for ti in t])
    margins = {
        "u_explicit": (bound_u - sup_u, tol_u),
        "u_half_cbar": (cb / 2.0 - sup_u, tol_u),
        "v_sup": (v_bound - record["sup_v"], tol_v),
        "grad_v_sup": (grad_bound - record["sup_grad_v"], tol_v),
    }
    worst = math.inf
    worst_slack = math.inf
    t_worst = math.nan
    details = {}
    for name, (m, tol) in margins.items():
        i = int(np.argmin(m))
        details[f"{name}_margin"] = float(m[i])
        # rank by slack beyond tolerance so mixed tolerances compare fairly
        if m[i] + tol < worst_slack:
            worst_slack = float(m[i] + tol)
            worst = float(m[i])
            t_worst = float(t[i])
    passed = worst_slack >= 0
    chi0 = model.chi0(params, norms)
    details["chi"] = params.chi
    details["chi0"] = chi0
    details["chi_below_chi0"] = params.chi < chi0
    details["c_bar"] = cb
    return VerificationReport(
        "boundedness", passed, worst, t_worst, max(tol_u, tol_v), details, _params_echo(params)
    )


def check_persistence(record, t_transient, params=None):
    """Realised floor ``m = min inf u`` over ``t >= t_transient``."""
    t = record["t"]
    sel = t >= t_transient
    if not np.any(sel):
        raise ValueError(f"no samples with t >= {t_transient}")
    inf_u = record["inf_u"][sel]
    i = int(np.argmin(inf_u))
    m = float(inf_u[i])
    big_m = float(np.max(record["sup_u"][sel]))
    report = VerificationReport(
        "persistence",
        m > 0,
        m,
        float(t[sel][i]),
        0.0,
        {"m": m, "M": big_m, "t_transient": t_transient},
        _params_echo(params),
    )
    return m, report


def _loglinear_fit(t, y):
    logy = np.log(y)
    slope, intercept = np.polyfit(t, logy, 1)
    resid = logy - (slope * t + intercept)
    return -float(slope), float(math.exp(intercept)), float(np.sqrt(np.mean(resid**2)))


def fit_decay(record, column="dev_u", window=None, theoretical_rate=math.nan, min_samples=10):
    """Least-squares fit of log(deviation) against t.

    ``window`` defaults to the last 60% of the record. Samples with
    non-positive deviation truncate the window to its leading positive
    run, which must still hold ``min_samples`` points.
    """
    t = record["t"]
    y = record[column]
    if window is None:
        window = (t[0] + 0.4 * (t[-1] - t[0]), t[-1])
    t1, t2 = window
    if t1 < t[0] - 1e-12 or t2 > t[-1] + 1e-12 or t1 >= t2:
        raise ValueError(f"window {window} outside record range [{t[0]}, {t[-1]}]")
    sel = (t >= t1 - 1e-12) & (t <= t2 + 1e-12)
    tw, yw = t[sel], y[sel]
    bad = np.nonzero(~(yw > 0))[0]
    if bad.size:
        tw, yw = tw[: bad[0]], yw[: bad[0]]
    if tw.size < min_samples:
        raise ValueError(f"only {tw.size} usable samples in the fit window, need {min_samples}")
    rate, pref, rms = _loglinear_fit(tw, yw)
    return DecayFit(rate, pref, (float(tw[0]), float(tw[-1])), rms, theoretical_rate, int(tw.size))


def first_entry_time(record, threshold, column="dev_u"):
    """First sample time at which ``column`` drops below ``threshold``."""
    t = record["t"]
    below = np.nonzero(record[column] < threshold)[0]
    return float(t[below[0]]) if below.size else None


def check_decay(record, params, sigma, epsilon, tail_fraction=0.6, rate_slack=0.1,
                final_dev_max=None):
    """Exponential-convergence check for u and v.

    The fit window is the last ``tail_fraction`` of the run, entered only
    after the u-deviation has fallen below the smallness threshold. Pass
    requires a fitted rate of at least ``(1 - rate_slack) σ(γ-1)`` for both
    components and, when ``final_dev_max`` is given, final deviations of u
    and v from equilibrium no larger than it.
    """
    model.check_decay_ranges(params, sigma, epsilon)
    target = sigma * (params.gamma - 1.0)
    threshold = model.smallness_threshold(params, sigma, epsilon)
    t = record["t"]
    t_in = first_entry_time(record, threshold)
    details = {"smallness_threshold": threshold, "t_entry": t_in, "target_rate": target}
    if t_in is None:
        return VerificationReport("decay", False, -math.inf, math.nan, 0.0, details,
                                  _params_echo(params)), None, None
    start = max(t_in, t[-1] - tail_fraction * (t[-1] - t[0]))
    fit_u = fit_decay(record, "dev_u", (start, t[-1]), target)
    fit_v = fit_decay(record, "dev_v", (start, t[-1]), target)
    floor = (1.0 - rate_slack) * target
    margin = min(fit_u.rate, fit_v.rate) - floor
    details.update(
        rate_u=fit_u.rate, rate_v=fit_v.rate, window_start=start,
        residual_u=fit_u.residual_rms, residual_v=fit_v.residual_rms,
        final_dev_u=float(record["dev_u"][-1]), final_dev_v=float(record["dev_v"][-1]),
    )
    passed = margin >= 0
    if final_dev_max is not None:
        final = max(details["final_dev_u"], details["final_dev_v"])
        details["final_dev_max"] = final_dev_max
        passed = passed and final <= final_dev_max
    report = VerificationReport("decay", passed, margin, start, 0.0, details,
                                _params_echo(params))
    return report, fit_u, fit_v


def ln_recursion(xi, params, n_max=10_000, tol=1e-12):
    """Iterate l_n = -β ξ l_{n-1}^2 + 2 l_{n-1} - 1/2 from l_0 = 1.

    β = (b/a)^{1/(γ-1)}. The fixed point is the smaller root of
    β ξ l^2 - l + 1/2 = 0, i.e. u* (1 + sqrt(1 - 2βξ)) / (2ξ).
    """
    u_star, _ = model.equilibrium(params)
    beta = 1.0 / u_star
    if not 0 < xi < u_star / 4.0:
        raise DomainError(f"xi must lie in (0, {u_star / 4.0:.6g}), got {xi}")
    if not 2 * beta * xi < 1:
        raise DomainError(f"need 2*beta*xi < 1, got {2 * beta * xi}")
    l_tilde = u_star * (1.0 + math.sqrt(1.0 - 2.0 * beta * xi)) / (2.0 * xi)
    iterates = [1.0]
    converged = False
    for _ in range(n_max):
        prev = iterates[-1]
        nxt = -beta * xi * prev * prev + 2.0 * prev - 0.5
        iterates.append(nxt)
        if abs(nxt - prev) < tol:
            converged = True
            break
    return LnSequence(xi, beta, tuple(iterates), l_tilde, converged)


def shifted_source(params, z):
    """a(γ z + u*) - b (z + u*)^γ, the logistic source in shifted variables."""
    u_star, _ = model.equilibrium(params)
    z = np.asarray(z, dtype=float)
    return params.a * (params.gamma * z + u_star) - params.b * (z + u_star) ** params.gamma


def source_curvature_limit(params):
    """lim_{z→0} |shifted_source(z)| / z^2 = (a/2) γ (γ-1) (b/a)^{1/(γ-1)}."""
    g = params.gamma
    return 0.5 * params.a * g * (g - 1.0) * (params.b / params.a) ** (1.0 / (g - 1.0))


def quadratic_source_control(params, samples, rel_tol=1e-12):
    """Audit |shifted_source(z)| <= a(γ-1)(b/a)^{1/(γ-1)} z^2 on ``samples``.

    Samples must satisfy z > -u*. Violations are listed in the details
    with their locations; the z→0 curvature is estimated by Richardson
    extrapolation and compared with the closed-form limit.
    """
    g = params.gamma
    if not 1 < g < 2:
        raise DomainError(f"quadratic control audit needs gamma in (1, 2), got {g}")
    u_star, _ = model.equilibrium(params)
    z = np.asarray(samples, dtype=float)
    if np.any(z <= -u_star):
        raise DomainError(f"samples must exceed -u* = {-u_star}")
    coeff = params.a * (g - 1.0) * (params.b / params.a) ** (1.0 / (g - 1.0))
    lhs = np.abs(shifted_source(params, z))
    rhs = coeff * z * z
    slack = rhs - lhs
    allowed = rel_tol * np.maximum(np.abs(rhs), np.abs(lhs)) + 1e-300
    viol = slack < -allowed
    # Richardson on q(h) = (|S(h)| + |S(-h)|) / (2h^2) = L + O(h^2)
    hs = [1e-2, 5e-3, 2.5e-3]
    q = [
        float((abs(shifted_source(params, h)) + abs(shifted_source(params, -h))) / (2 * h * h))
        for h in hs
    ]
    r1 = (4 * q[1] - q[0]) / 3
    r2 = (4 * q[2] - q[1]) / 3
    extrap = (16 * r2 - r1) / 15
    limit = source_curvature_limit(params)
    limit_ok = abs(extrap - limit) <= 1e-4 * max(1.0, abs(limit))
    worst_i = int(np.argmin(slack)) if slack.size else 0
    details = {
        "coefficient": coeff,
        "violations": int(viol.sum()),
        "violation_z": [float(x) for x in z[viol]],
        "limit_closed_form": limit,
        "limit_extrapolated": extrap,
        "limit_ok": limit_ok,
    }
    if viol.any():
        vz = z[viol]
        details["violation_range"] = (float(vz.min()), float(vz.max()))
    return VerificationReport(
        "quadratic_source",
        (not viol.any()) and limit_ok,
        float(slack[worst_i]) if slack.size else 0.0,
        float(z[worst_i]) if slack.size else math.nan,
        rel_tol,
        details,
        _params_echo(params),
    )


def decay_identity_residual(params, sigma, epsilon):
    """Relative residual of the algebraic identity behind the decay estimate.

    ε c~ - ε² A (a-2σ)/(4B) - a β c~²/(a-σ) should equal ε² A σ/(4B) with
    A = a^{(2-γ)/(γ-1)}, B = b^{1/(γ-1)}, β = (b/a)^{1/(γ-1)}.
    """
    g1 = params.gamma - 1.0
    a, b = params.a, params.b
    big_a = a ** ((2.0 - params.gamma) / g1)
    big_b = b ** (1.0 / g1)
    beta = (b / a) ** (1.0 / g1)
    ct = model.c_tilde(params, sigma, epsilon)
    lhs = (
        epsilon * ct
        - epsilon**2 * big_a * (a - 2.0 * sigma) / (4.0 * big_b)
        - a * beta * ct * ct / (a - sigma)
    )
    rhs = epsilon**2 * big_a * sigma / (4.0 * big_b)
    return abs(lhs - rhs) / abs(rhs), lhs, rhs


def check_decay_constants(params, norms, sigma, epsilon, rel_tol=1e-12):
    model.check_decay_ranges(params, sigma, epsilon)
    resid, lhs, rhs = decay_identity_residual(params, sigma, epsilon)
    threshold = model.smallness_threshold(params, sigma, epsilon)
    details = {
        "identity_lhs": lhs,
        "identity_rhs": rhs,
        "relative_residual": resid,
        "smallness_threshold": threshold,
        "c_tilde": model.c_tilde(params, sigma, epsilon),
        "c_vtilde": model.c_vtilde(params, norms, sigma, epsilon),
    }
    return VerificationReport(
        "decay_constants", resid <= rel_tol, rel_tol - resid, math.nan, rel_tol,
        details, _params_echo(params),
    )
