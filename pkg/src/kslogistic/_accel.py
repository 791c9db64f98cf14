"""Pointwise hot kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``KSLOGISTIC_NUMBA=0`` in
the environment to force the numpy path (useful for debugging and for the
benchmark in ``benchmarks/bench_kernels.py``). If numba cannot be imported
the numpy path is used silently.

Every public kernel takes arrays of any shape and works on a flattened,
C-contiguous view; both paths return bit-compatible results up to the
usual floating point reassociation differences of ``pow``.
"""

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

# |z| below this uses the Taylor series for the phi functions
PHI_SERIES_CUTOFF = 1e-4


def _want_numba():
    flag = os.environ.get("KSLOGISTIC_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


try:
    if not _want_numba():
        raise ImportError("disabled by KSLOGISTIC_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError as exc:
    logger.debug("numba kernels unavailable: %s", exc)
    HAS_NUMBA = False


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy reference implementations (always defined; the benchmark uses them)


def np_phi12(z):
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < PHI_SERIES_CUTOFF
    zs = np.where(small, 1.0, z)
    em1 = np.expm1(zs)
    phi1 = np.where(small, 1.0 + z / 2.0 + z * z / 6.0 + z**3 / 24.0, em1 / zs)
    phi2 = np.where(
        small,
        0.5 + z / 6.0 + z * z / 24.0 + z**3 / 120.0,
        (em1 - zs) / (zs * zs),
    )
    return phi1, phi2


def np_logistic_source(u, growth, b, gamma):
    return growth * u - b * np.maximum(u, 0.0) ** gamma


def np_clip_negative(u):
    neg = np.minimum(u, 0.0)
    removed = -neg.sum()
    np.maximum(u, 0.0, out=u)
    return removed


def np_etd_update(e, w, x, n):
    return e * x + w * n


def np_etd_correct(base, w2, n_new, n_old):
    return base + w2 * (n_new - n_old)


def np_sup_abs_deviation(u, c):
    return float(np.max(np.abs(u - c)))


def np_sup_euclidean(components):
    sq = np.zeros_like(components[0])
    for comp in components:
        sq += comp * comp
    return float(np.sqrt(sq.max()))


# ---------------------------------------------------------------------------
# numba implementations

if HAS_NUMBA:

    @njit(cache=True)
    def _nb_phi12(z, phi1, phi2):
        for i in range(z.size):
            zi = z[i]
            if abs(zi) < PHI_SERIES_CUTOFF:
                phi1[i] = 1.0 + zi / 2.0 + zi * zi / 6.0 + zi * zi * zi / 24.0
                phi2[i] = 0.5 + zi / 6.0 + zi * zi / 24.0 + zi * zi * zi / 120.0
            else:
                em1 = np.expm1(zi)
                phi1[i] = em1 / zi
                phi2[i] = (em1 - zi) / (zi * zi)

    @njit(cache=True)
    def _nb_logistic_source(u, growth, b, gamma, out):
        for i in range(u.size):
            ui = u[i]
            p = ui ** gamma if ui > 0.0 else 0.0
            out[i] = growth * ui - b * p

    @njit(cache=True)
    def _nb_clip_negative(u):
        removed = 0.0
        for i in range(u.size):
            if u[i] < 0.0:
                removed -= u[i]
                u[i] = 0.0
        return removed

    @njit(cache=True)
    def _nb_etd_update(e, w, x, n, out):
        for i in range(x.size):
            out[i] = e[i] * x[i] + w[i] * n[i]

    @njit(cache=True)
    def _nb_etd_correct(base, w2, n_new, n_old, out):
        for i in range(base.size):
            out[i] = base[i] + w2[i] * (n_new[i] - n_old[i])

    @njit(cache=True)
    def _nb_sup_abs_deviation(u, c):
        m = 0.0
        for i in range(u.size):
            d = abs(u[i] - c)
            if d > m:
                m = d
        return m

    @njit(cache=True)
    def _nb_sup_euclidean(stack):
        m = 0.0
        for i in range(stack.shape[1]):
            s = 0.0
            for j in range(stack.shape[0]):
                s += stack[j, i] * stack[j, i]
            if s > m:
                m = s
        return np.sqrt(m)


def _flat(a, dtype):
    return np.ascontiguousarray(a, dtype=dtype).reshape(-1)


def phi12(z):
    """Return ``(phi1(z), phi2(z))`` elementwise.

    ``phi1(z) = (e^z - 1)/z`` and ``phi2(z) = (e^z - 1 - z)/z^2`` with a
    cubic Taylor expansion for ``|z| < 1e-4`` to avoid cancellation.
    """
    z = np.asarray(z, dtype=np.float64)
    if not HAS_NUMBA:
        return np_phi12(z)
    zf = _flat(z, np.float64)
    p1 = np.empty_like(zf)
    p2 = np.empty_like(zf)
    _nb_phi12(zf, p1, p2)
    return p1.reshape(z.shape), p2.reshape(z.shape)


def logistic_source(u, growth, b, gamma):
    """``growth*u - b*max(u, 0)**gamma`` pointwise."""
    if not HAS_NUMBA:
        return np_logistic_source(u, growth, b, gamma)
    uf = _flat(u, np.float64)
    out = np.empty_like(uf)
    _nb_logistic_source(uf, float(growth), float(b), float(gamma), out)
    return out.reshape(np.shape(u))


def clip_negative(u):
    """Clamp ``u`` at zero in place; return the total removed amount."""
    if not u.flags.c_contiguous:
        raise ValueError("clip_negative needs a C-contiguous array")
    if not HAS_NUMBA:
        return float(np_clip_negative(u))
    return float(_nb_clip_negative(u.reshape(-1)))


def etd_update(e, w, x, n):
    """``e*x + w*n`` for real multipliers ``e, w`` and complex ``x, n``."""
    if not HAS_NUMBA:
        return np_etd_update(e, w, x, n)
    shape = x.shape
    out = np.empty(x.size, dtype=np.complex128)
    _nb_etd_update(
        _flat(e, np.float64), _flat(w, np.float64),
        _flat(x, np.complex128), _flat(n, np.complex128), out,
    )
    return out.reshape(shape)


def etd_correct(base, w2, n_new, n_old):
    """``base + w2*(n_new - n_old)``, the ETD2RK corrector."""
    if not HAS_NUMBA:
        return np_etd_correct(base, w2, n_new, n_old)
    shape = base.shape
    out = np.empty(base.size, dtype=np.complex128)
    _nb_etd_correct(
        _flat(base, np.complex128), _flat(w2, np.float64),
        _flat(n_new, np.complex128), _flat(n_old, np.complex128), out,
    )
    return out.reshape(shape)


def sup_abs_deviation(u, c):
    """``max |u - c|`` over all entries."""
    if not HAS_NUMBA:
        return np_sup_abs_deviation(u, c)
    return float(_nb_sup_abs_deviation(_flat(u, np.float64), float(c)))


def sup_euclidean(components):
    """Max over grid points of the Euclidean norm of a vector field."""
    if not HAS_NUMBA:
        return np_sup_euclidean(components)
    stack = np.stack([np.asarray(c, dtype=np.float64).reshape(-1) for c in components])
    return float(_nb_sup_euclidean(stack))
