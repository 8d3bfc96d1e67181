"""Complex Gamma, complex-order Bessel functions, and the one-mode closed forms.

Everything here is a direct power-series evaluation: the arguments that occur
in this library are small (|u| <= 10, moderate orders), where the defining
series converges in a few dozen terms and no asymptotic machinery is needed.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .errors import (
    BranchCutError,
    ConvergenceError,
    DomainError,
    IllConditionedWarning,
    IntegerOrderError,
    PoleError,
)

__all__ = [
    "SeriesControl",
    "gamma",
    "rgamma",
    "bessel_j",
    "bessel_j_prime",
    "bessel_y",
    "dirichlet_endpoint_model",
    "neumann_endpoint_model",
    "f_alpha",
    "g_alpha",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the power series in this module."""

    max_terms: int = 200
    rel_tol: float = 1e-12

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")


DEFAULT_CONTROL = SeriesControl()

# Lanczos rational approximation, g = 7, 9 terms.  Gives full double
# precision on Re z >= 1/2; the reflection formula covers the rest.
_LANCZOS_G = 7.0
_LANCZOS_C0 = 0.99999999999980993
_LANCZOS_C = (
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _lgamma(z: complex) -> complex:
    """A branch of log Gamma; only ever consumed through exp()."""
    if z.real < 0.5:
        # log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
        return _LOG_PI - _clog_sin_pi(z) - _lgamma(1.0 - z)
    w = z - 1.0
    acc = _LANCZOS_C0
    for i, c in enumerate(_LANCZOS_C):
        acc += c / (w + i + 1.0)
    t = w + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (w + 0.5) * cmath.log(t) - t + cmath.log(acc)


def _clog_sin_pi(z: complex) -> complex:
    # log(sin(pi z)) written to avoid overflow for large |Im z|
    if abs(z.imag) < 20.0:
        return cmath.log(cmath.sin(math.pi * z))
    # sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i; keep the dominant factor
    if z.imag > 0:
        return -1j * math.pi * z + cmath.log((1.0 - cmath.exp(2j * math.pi * z)) / 2j)
    return 1j * math.pi * z + cmath.log(-(1.0 - cmath.exp(-2j * math.pi * z)) / 2j)


def gamma(z) -> complex:
    """Complex Gamma function (relative error ~1e-13 for |z| <= 50)."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"gamma pole at z = {z}")
    return cmath.exp(_lgamma(z))


def rgamma(z) -> complex:
    """1 / Gamma(z), entire: returns exactly 0 at the poles of Gamma."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        return 0j
    return cmath.exp(-_lgamma(z))


def _is_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real == math.floor(z.real)


def bessel_j(nu, u, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Bessel J of complex order and argument by its defining power series.

    The prefactor (u/2)^nu uses the principal branch; for non-integer nu the
    closed negative real axis is rejected rather than given a one-sided
    value.  Valid well inside |u| <= 10, |nu| <= 60 at rel_tol 1e-12.
    """
    nu = complex(nu)
    u = complex(u)
    integer_order = _is_integer(nu)
    if u == 0:
        if nu == 0:
            return 1.0 + 0j
        if nu.real > 0:
            return 0j
        raise DomainError("bessel_j at u = 0 requires Re(nu) > 0 or nu = 0")
    if not integer_order and u.imag == 0.0 and u.real < 0.0:
        raise BranchCutError("bessel_j: u on the negative real axis cut")

    half = u / 2.0
    if integer_order:
        n = int(nu.real)
        prefactor = half ** n
    else:
        prefactor = cmath.exp(nu * cmath.log(half))

    mz2 = -(half * half)
    q = 1.0 + 0j  # (-(u/2)^2)^m / m!
    total = 0j
    for m in range(ctl.max_terms):
        term = q * rgamma(m + nu + 1.0)
        total += term
        if m >= 1 and total != 0:
            # past the hump: next-term ratio < 1/2 and this term negligible
            ratio = abs(mz2) / ((m + 1.0) * max(1.0, abs(m + nu + 1.0)))
            if ratio < 0.5 and abs(term) <= ctl.rel_tol * abs(total):
                return prefactor * total
        q *= mz2 / (m + 1.0)
    raise ConvergenceError(
        f"bessel_j series did not reach rel_tol={ctl.rel_tol} in "
        f"{ctl.max_terms} terms (nu={nu}, u={u})"
    )


def bessel_j_prime(nu, u, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """d/du J_nu(u) through the order-recurrence J' = (nu/u) J_nu - J_{nu+1}."""
    nu = complex(nu)
    u = complex(u)
    if u == 0:
        raise DomainError("bessel_j_prime requires u != 0")
    return (nu / u) * bessel_j(nu, u, ctl) - bessel_j(nu + 1.0, u, ctl)


def bessel_y(nu, u, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Bessel Y for non-integer order via the J_{+nu}/J_{-nu} combination."""
    nu = complex(nu)
    u = complex(u)
    if _is_integer(nu):
        raise IntegerOrderError("bessel_y is not defined here for integer nu")
    dist = abs(nu - complex(round(nu.real), 0.0))
    if dist < 1e-4:
        warnings.warn(
            f"bessel_y: order within {dist:.2e} of an integer, "
            "cancellation will cost digits",
            IllConditionedWarning,
            stacklevel=2,
        )
    num = bessel_j(nu, u, ctl) * cmath.cos(math.pi * nu) - bessel_j(-nu, u, ctl)
    return num / cmath.sin(math.pi * nu)


def dirichlet_endpoint_model(lam, K, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """s(lambda, 0, pi) for V = K e^{2ix}: pi J_{r}(sqrt K) J_{-r}(sqrt K), r = sqrt(lambda)."""
    K = complex(K)
    if K == 0:
        raise DomainError("model endpoint formulas require K != 0")
    r = cmath.sqrt(complex(lam))
    u = cmath.sqrt(K)
    return math.pi * bessel_j(r, u, ctl) * bessel_j(-r, u, ctl)


def neumann_endpoint_model(lam, K, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """c'(lambda, 0, pi) for V = K e^{2ix}: pi K J'_{r}(sqrt K) J'_{-r}(sqrt K)."""
    K = complex(K)
    if K == 0:
        raise DomainError("model endpoint formulas require K != 0")
    r = cmath.sqrt(complex(lam))
    u = cmath.sqrt(K)
    return math.pi * K * bessel_j_prime(r, u, ctl) * bessel_j_prime(-r, u, ctl)


def f_alpha(alpha, K, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """The scaled-order series sum_m (K/4)^m / (m! Gamma(m+alpha+1)).

    Equals (i sqrt(K)/2)^(-alpha) J_alpha(i sqrt(K)); the scaling removes the
    complex prefactor so the value is real for real alpha and K > 0.
    """
    alpha = complex(alpha)
    K = float(K)
    if not K > 0:
        raise DomainError("f_alpha requires K > 0")
    q = 1.0  # (K/4)^m / m!
    total = 0j
    for m in range(ctl.max_terms):
        term = q * rgamma(m + alpha + 1.0)
        total += term
        if m >= 1 and total != 0:
            ratio = (K / 4.0) / ((m + 1.0) * max(1.0, abs(m + alpha + 1.0)))
            if ratio < 0.5 and abs(term) <= ctl.rel_tol * abs(total):
                return total
        q *= (K / 4.0) / (m + 1.0)
    raise ConvergenceError(
        f"f_alpha series did not reach rel_tol={ctl.rel_tol} in "
        f"{ctl.max_terms} terms (alpha={alpha}, K={K})"
    )


def g_alpha(alpha, K, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """(i sqrt(K)/2)^(1-alpha) J'_alpha(i sqrt(K)) as a real-valued series.

    Expanding J' through the order recurrence J'_a = (a/u) J_a - J_{a+1}
    turns the scaled derivative into (alpha/2) f(alpha) + (K/4) f(alpha+1),
    which keeps real inputs exactly real.
    """
    alpha = complex(alpha)
    K = float(K)
    return (alpha / 2.0) * f_alpha(alpha, K, ctl) + (K / 4.0) * f_alpha(
        alpha + 1.0, K, ctl
    )
