"""Adaptive Dormand-Prince 5(4) propagation of the fundamental system.

State layout (complex128):
    y[0:4] = (c, c', s, s')                     the fundamental pair
    y[4:8] = d/dlambda of the same entries      (variational system)

The ODE is linear, -psi'' + (V(x) - lambda) psi = 0, so the right-hand side
is cheap and the only x-dependence is the finite Fourier sum V(x).
Error control is per unit step on the max norm, relative to max(1, |y|).
"""

import numba
import numpy as np
from numba import njit, prange

# the portable threading layer; avoids probing TBB/OpenMP at import time
numba.config.THREADING_LAYER = "workqueue"

# Dormand-Prince 5(4) tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_BUDGET = 2

_MAX_STEPS = 4_000_000


@njit(cache=True)
def _vx(x, ns, vs):
    out = 0.0 + 0.0j
    for i in range(ns.shape[0]):
        out += vs[i] * np.exp(2j * ns[i] * x)
    return out


@njit(cache=True)
def _deriv(x, y, k, lam, ns, vs, dim):
    q = _vx(x, ns, vs) - lam
    k[0] = y[1]
    k[1] = q * y[0]
    k[2] = y[3]
    k[3] = q * y[2]
    if dim == 8:
        k[4] = y[5]
        k[5] = q * y[4] - y[0]
        k[6] = y[7]
        k[7] = q * y[6] - y[2]


@njit(cache=True)
def _propagate_adaptive(ns, vs, lam, x0, span, tol, y):
    """Advance y across [x0, x0+span] in place.

    Returns (status, x_reached, n_steps).
    """
    dim = y.shape[0]
    k1 = np.empty(dim, dtype=np.complex128)
    k2 = np.empty(dim, dtype=np.complex128)
    k3 = np.empty(dim, dtype=np.complex128)
    k4 = np.empty(dim, dtype=np.complex128)
    k5 = np.empty(dim, dtype=np.complex128)
    k6 = np.empty(dim, dtype=np.complex128)
    k7 = np.empty(dim, dtype=np.complex128)
    yt = np.empty(dim, dtype=np.complex128)
    ynew = np.empty(dim, dtype=np.complex128)

    x = x0
    x_end = x0 + span
    omega = np.sqrt(abs(lam)) + 1.0
    for i in range(vs.shape[0]):
        omega += np.sqrt(abs(vs[i]))
    h = min(0.1 * span, 0.5 / omega)
    hmin = 1e-13 * span

    _deriv(x, y, k1, lam, ns, vs, dim)
    steps = 0
    fsal_fresh = True
    while x < x_end:
        if steps > _MAX_STEPS:
            return STATUS_BUDGET, x, steps
        if h < hmin:
            return STATUS_STEP_UNDERFLOW, x, steps
        if x + h > x_end:
            h = x_end - x
            fsal_fresh = fsal_fresh  # k1 still valid; only h changed

        for i in range(dim):
            yt[i] = y[i] + h * _A21 * k1[i]
        _deriv(x + _C2 * h, yt, k2, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _deriv(x + _C3 * h, yt, k3, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _deriv(x + _C4 * h, yt, k4, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * (
                _A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]
            )
        _deriv(x + _C5 * h, yt, k5, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * (
                _A61 * k1[i]
                + _A62 * k2[i]
                + _A63 * k3[i]
                + _A64 * k4[i]
                + _A65 * k5[i]
            )
        _deriv(x + h, yt, k6, lam, ns, vs, dim)
        for i in range(dim):
            ynew[i] = y[i] + h * (
                _B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i]
            )
        _deriv(x + h, ynew, k7, lam, ns, vs, dim)

        err = 0.0
        ymag = 1.0
        for i in range(dim):
            e = abs(
                _E1 * k1[i]
                + _E3 * k3[i]
                + _E4 * k4[i]
                + _E5 * k5[i]
                + _E6 * k6[i]
                + _E7 * k7[i]
            )
            if e > err:
                err = e
            a = abs(ynew[i])
            if a > ymag:
                ymag = a
        # error per unit step, relative to the solution scale
        tol_eff = tol * ymag
        steps += 1
        if err <= tol_eff:
            x += h
            for i in range(dim):
                y[i] = ynew[i]
                k1[i] = k7[i]  # FSAL
            if err > 0.0:
                fac = 0.9 * (tol_eff / err) ** 0.2
                if fac > 5.0:
                    fac = 5.0
                h *= fac
            else:
                h *= 5.0
        else:
            fac = 0.9 * (tol_eff / err) ** 0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
    return STATUS_OK, x, steps


@njit(cache=True)
def _propagate_fixed(ns, vs, lam, x0, span, nsteps, y):
    """Fixed-step Dormand-Prince pass; error varies smoothly with x0.

    Used where endpoint values are differenced numerically in x0, so the
    discretization error must be a smooth function of the window position.
    """
    dim = y.shape[0]
    k1 = np.empty(dim, dtype=np.complex128)
    k2 = np.empty(dim, dtype=np.complex128)
    k3 = np.empty(dim, dtype=np.complex128)
    k4 = np.empty(dim, dtype=np.complex128)
    k5 = np.empty(dim, dtype=np.complex128)
    k6 = np.empty(dim, dtype=np.complex128)
    yt = np.empty(dim, dtype=np.complex128)
    h = span / nsteps
    x = x0
    for _ in range(nsteps):
        _deriv(x, y, k1, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * _A21 * k1[i]
        _deriv(x + _C2 * h, yt, k2, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _deriv(x + _C3 * h, yt, k3, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _deriv(x + _C4 * h, yt, k4, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * (
                _A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]
            )
        _deriv(x + _C5 * h, yt, k5, lam, ns, vs, dim)
        for i in range(dim):
            yt[i] = y[i] + h * (
                _A61 * k1[i]
                + _A62 * k2[i]
                + _A63 * k3[i]
                + _A64 * k4[i]
                + _A65 * k5[i]
            )
        _deriv(x + h, yt, k6, lam, ns, vs, dim)
        for i in range(dim):
            y[i] = y[i] + h * (
                _B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i]
            )
        x += h
    return STATUS_OK


@njit(cache=True)
def _init_state(dim):
    y = np.zeros(dim, dtype=np.complex128)
    y[0] = 1.0 + 0j  # c(x0) = 1
    y[3] = 1.0 + 0j  # s'(x0) = 1
    return y


@njit(cache=True, parallel=True)
def _endpoints_batch(ns, vs, lams, x0, span, tol, with_dl):
    """Endpoint data for many lambda values; slot-parallel, deterministic."""
    n = lams.shape[0]
    dim = 8 if with_dl else 4
    out = np.zeros((n, 8), dtype=np.complex128)
    status = np.zeros(n, dtype=np.int64)
    for i in prange(n):
        y = _init_state(dim)
        st, _, _ = _propagate_adaptive(ns, vs, lams[i], x0, span, tol, y)
        status[i] = st
        for j in range(dim):
            out[i, j] = y[j]
    return out, status


def warmup():
    """Trigger JIT compilation of all kernels on tiny inputs."""
    ns = np.array([1], dtype=np.int64)
    vs = np.array([0.5 + 0j], dtype=np.complex128)
    y = _init_state(8)
    _propagate_adaptive(ns, vs, 1.0 + 0j, 0.0, 0.25, 1e-8, y)
    y4 = _init_state(4)
    _propagate_fixed(ns, vs, 1.0 + 0j, 0.0, 0.25, 8, y4)
    lams = np.array([1.0 + 0j, 2.0 + 0j], dtype=np.complex128)
    _endpoints_batch(ns, vs, lams, 0.0, 0.25, 1e-8, True)
    _endpoints_batch(ns, vs, lams, 0.0, 0.25, 1e-8, False)
