"""Fundamental system, monodromy matrix, Floquet discriminant, Green diagnostics."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _rk
from .errors import DomainError, SpectrumProximityError, StepSizeError
from .potential import Potential, eval_potential

__all__ = [
    "FundamentalData",
    "Monodromy",
    "integrate_fundamental",
    "monodromy",
    "discriminant",
    "diagonal_green",
    "green_identity_residual",
    "free_c",
    "free_s",
]

TOL_MIN = 1e-13
TOL_MAX = 1e-6
DEFAULT_TOL = 1e-10

SPECTRUM_EPS = 1e-10  # |Delta^2 - 1| below this counts as "on the spectrum"


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise DomainError(f"tol must lie in [{TOL_MIN:g}, {TOL_MAX:g}], got {tol:g}")
    return tol


@dataclass(frozen=True)
class FundamentalData:
    """Endpoint values of the fundamental pair c, s over one period.

    c(x0) = 1, c'(x0) = 0, s(x0) = 0, s'(x0) = 1; the *_end fields are the
    values at x0 + pi.  dlambda, when present, holds the lambda-derivatives
    (dc, dc', ds, ds') from the variational system.
    """

    lam: complex
    x0: float
    c_end: complex
    c_prime_end: complex
    s_end: complex
    s_prime_end: complex
    dlambda: Optional[tuple] = None
    wronskian_defect: float = 0.0

    @property
    def delta(self) -> complex:
        return 0.5 * (self.c_end + self.s_prime_end)

    @property
    def delta_prime(self) -> complex:
        if self.dlambda is None:
            raise DomainError("dlambda was not requested for this record")
        return 0.5 * (self.dlambda[0] + self.dlambda[3])


@dataclass(frozen=True)
class Monodromy:
    """2x2 transfer matrix of solution data across one period."""

    lam: complex
    x0: float
    entries: np.ndarray  # [[c, s], [c', s']] at x0 + pi

    @property
    def det(self) -> complex:
        m = self.entries
        return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]

    @property
    def trace(self) -> complex:
        return self.entries[0, 0] + self.entries[1, 1]


def _raw_endpoints(p: Potential, lam: complex, x0: float, tol: float, with_dl: bool):
    ns, vs = p.coeff_arrays()
    dim = 8 if with_dl else 4
    y = _rk._init_state(dim)
    status, x_reached, _ = _rk._propagate_adaptive(
        ns, vs, complex(lam), float(x0), math.pi, tol, y
    )
    if status == _rk.STATUS_STEP_UNDERFLOW:
        raise StepSizeError("step size underflow", x_reached)
    if status == _rk.STATUS_BUDGET:
        raise StepSizeError("step budget exhausted", x_reached)
    return y


def _endpoints_many(p: Potential, lams: np.ndarray, x0: float, tol: float, with_dl: bool):
    """Batched endpoint data; the intended parallel surface over lambda."""
    ns, vs = p.coeff_arrays()
    lams = np.ascontiguousarray(lams, dtype=np.complex128)
    out, status = _rk._endpoints_batch(ns, vs, lams, float(x0), math.pi, tol, with_dl)
    if np.any(status != _rk.STATUS_OK):
        bad = int(np.argmax(status != _rk.STATUS_OK))
        raise StepSizeError(
            f"integration failed at lambda = {lams[bad]}", float(x0)
        )
    return out


def integrate_fundamental(
    p: Potential,
    lam: complex,
    x0: float = 0.0,
    tol: float = DEFAULT_TOL,
    with_dlambda: bool = False,
) -> FundamentalData:
    """Integrate the fundamental system across [x0, x0 + pi].

    Solves -psi'' + (V - lambda) psi = 0 as a first-order complex linear
    system with an embedded adaptive Dormand-Prince 5(4) pair, local error
    per unit step <= tol.  with_dlambda additionally integrates the
    variational system (forcing term -psi) for the lambda-derivatives.
    """
    tol = _check_tol(tol)
    y = _raw_endpoints(p, lam, x0, tol, with_dlambda)
    wdef = abs(y[0] * y[3] - y[1] * y[2] - 1.0)
    dl = (y[4], y[5], y[6], y[7]) if with_dlambda else None
    return FundamentalData(
        lam=complex(lam),
        x0=float(x0),
        c_end=y[0],
        c_prime_end=y[1],
        s_end=y[2],
        s_prime_end=y[3],
        dlambda=dl,
        wronskian_defect=float(wdef),
    )


def monodromy(p: Potential, lam: complex, x0: float = 0.0, tol: float = DEFAULT_TOL) -> Monodromy:
    fd = integrate_fundamental(p, lam, x0, tol)
    m = np.array(
        [[fd.c_end, fd.s_end], [fd.c_prime_end, fd.s_prime_end]],
        dtype=np.complex128,
    )
    return Monodromy(lam=complex(lam), x0=float(x0), entries=m)


def discriminant(p: Potential, lam: complex, tol: float = DEFAULT_TOL) -> complex:
    """Half the monodromy trace, evaluated at x0 = 0.

    Independence of the base point is a theorem about the continuous
    problem; the test suite checks it rather than assuming it.
    """
    fd = integrate_fundamental(p, lam, 0.0, tol)
    return fd.delta


def free_c(lam: complex, t: float) -> complex:
    """cos(sqrt(lambda) t), the zero-potential c(lambda, x0, x0+t)."""
    return cmath.cos(cmath.sqrt(complex(lam)) * t)


def free_s(lam: complex, t: float) -> complex:
    """sin(sqrt(lambda) t)/sqrt(lambda), series-evaluated near lambda = 0."""
    lam = complex(lam)
    if abs(lam) * t * t < 1e-2:
        # even series in sqrt(lambda): t * sum_k (-lam t^2)^k / (2k+1)!
        z = -lam * t * t
        term = 1.0 + 0j
        total = 1.0 + 0j
        for k in range(1, 12):
            term *= z / ((2 * k) * (2 * k + 1))
            total += term
            if abs(term) < 1e-18 * abs(total):
                break
        return t * total
    r = cmath.sqrt(lam)
    return cmath.sin(r * t) / r


def _sqrt_disc_continued(p: Potential, lam: complex, tol: float, delta_sq_m1: complex) -> complex:
    """sqrt(Delta(lambda)^2 - 1) continued from the negative real axis.

    The branch is anchored far down the negative real axis, where the
    resolvent is free-like and the correct root is the negative real one,
    then tracked by nearest-root continuation along the real segment up to
    -|lambda| and the straight path from -|lambda| to lambda.
    """
    anchor = -max(abs(lam), 1.0 + p.sum_abs(), 1.0)

    def disc_sq_m1(z: complex) -> complex:
        d = discriminant(p, z, tol)
        return d * d - 1.0

    path = [complex(anchor)]
    turn = complex(-abs(lam)) if abs(lam) > 0 else complex(anchor)
    if abs(turn - path[-1]) > 1e-12:
        path.append(turn)
    if abs(complex(lam) - path[-1]) > 1e-12:
        path.append(complex(lam))

    w = -cmath.sqrt(disc_sq_m1(path[0]))
    if w.real > 0:  # principal sqrt of a near-positive number: force the
        w = -w  # negative real root seen by the free resolvent

    for a, b in zip(path[:-1], path[1:]):
        w = _continue_segment(disc_sq_m1, a, b, w, lam, delta_sq_m1)
    return w


def _continue_segment(func, a, b, w, lam_target, target_value, depth: int = 0) -> complex:
    value = target_value if b == lam_target else func(b)
    s = cmath.sqrt(value)
    cand = s if abs(s - w) <= abs(-s - w) else -s
    # ambiguous flip: both roots nearly equidistant from the previous value
    if abs(cand - w) > 0.8 * abs(cand + w) and depth < 14:
        mid = 0.5 * (a + b)
        w_mid = _continue_segment(func, a, mid, w, lam_target, target_value, depth + 1)
        return _continue_segment(func, mid, b, w_mid, lam_target, target_value, depth + 1)
    return cand


def diagonal_green(p: Potential, lam: complex, x: float, tol: float = DEFAULT_TOL) -> complex:
    """Diagonal Green's function -s(lambda, x, x+pi) / (2 sqrt(Delta^2 - 1)).

    The square-root branch maps the positive real axis onto itself and is
    continued off the spectrum; concretely it is tracked along a straight
    path from the negative real axis (see _sqrt_disc_continued).
    """
    tol = _check_tol(tol)
    d = discriminant(p, lam, tol)
    d2m1 = d * d - 1.0
    if abs(d2m1) < SPECTRUM_EPS:
        raise SpectrumProximityError(
            f"lambda = {lam} is within {SPECTRUM_EPS:g} of the spectrum"
        )
    w = _sqrt_disc_continued(p, lam, tol, d2m1)
    fd = integrate_fundamental(p, lam, x, tol)
    return -fd.s_end / (2.0 * w)


def green_identity_residual(p: Potential, lam: complex, x: float, tol: float = DEFAULT_TOL) -> float:
    """Residual of the quadratic Green identity
    -2 g_xx g + g_x^2 + 4 (V - lambda) g^2 - 1.

    g_x and g_xx use central differences with step h = 1e-4.  The three
    window integrations run with a shared fixed step count so that the
    integrator error is a smooth function of the window position and
    cancels in the differences.
    """
    tol = _check_tol(tol)
    d = discriminant(p, lam, tol)
    d2m1 = d * d - 1.0
    if abs(d2m1) < SPECTRUM_EPS:
        raise SpectrumProximityError(
            f"lambda = {lam} is within {SPECTRUM_EPS:g} of the spectrum"
        )
    w = _sqrt_disc_continued(p, lam, tol, d2m1)

    ns, vs = p.coeff_arrays()
    probe = _rk._init_state(4)
    status, x_fail, nsteps = _rk._propagate_adaptive(
        ns, vs, complex(lam), float(x), math.pi, tol, probe
    )
    if status != _rk.STATUS_OK:
        raise StepSizeError("probe integration failed", x_fail)
    nfixed = max(128, int(1.3 * nsteps) + 1)

    h = 1e-4
    g3 = []
    for xs in (x - h, x, x + h):
        y = _rk._init_state(4)
        _rk._propagate_fixed(ns, vs, complex(lam), float(xs), math.pi, nfixed, y)
        g3.append(-y[2] / (2.0 * w))
    gm, g0, gp = g3
    gx = (gp - gm) / (2.0 * h)
    gxx = (gp - 2.0 * g0 + gm) / (h * h)
    v = eval_potential(p, x)
    res = -2.0 * gxx * g0 + gx * gx + 4.0 * (v - complex(lam)) * g0 * g0 - 1.0
    return abs(res)
