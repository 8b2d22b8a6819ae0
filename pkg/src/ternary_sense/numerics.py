"""Special functions and a safeguarded root finder.

Everything here is domain-free: the regularized incomplete gamma pair and its
inverse, the Gaussian tail function and its inverse, and a bracketed
Newton/bisection solver used by every threshold computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Optional

import numpy as np

from .errors import BracketError, DomainError

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_MAXIT = 100_000
_STD_NORMAL = NormalDist()


def ln_gamma(a: float) -> float:
    """Natural log of the gamma function for ``a > 0``."""
    if not a > 0 or math.isinf(a):
        raise DomainError(f"ln_gamma requires a > 0, got {a!r}")
    return math.lgamma(a)


def _log_prefactor(a: float, x: float) -> float:
    # log(x^a e^-x / Gamma(a))
    return a * math.log(x) - x - math.lgamma(a)


def _series_p(a: float, x: float) -> float:
    ap = a
    term = total = 1.0 / a
    for _ in range(_MAXIT):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(_log_prefactor(a, x))
    raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _contfrac_q(a: float, x: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= 4.0 * _EPS:
            return h * math.exp(_log_prefactor(a, x))
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def reg_gamma(a: float, x: float) -> tuple[float, float]:
    """Regularized lower and upper incomplete gamma ratios ``(P, Q)``.

    Uses the power series for ``x < a + 1`` and the continued fraction
    otherwise; the complementary value is obtained by subtraction so that
    ``P + Q == 1`` up to rounding.
    """
    if not a > 0 or math.isinf(a):
        raise DomainError(f"reg_gamma requires a > 0, got a={a!r}")
    if not x >= 0:
        raise DomainError(f"reg_gamma requires x >= 0, got x={x!r}")
    if x == 0.0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    if x < a + 1.0:
        p = min(_series_p(a, x), 1.0)
        return p, 1.0 - p
    q = min(_contfrac_q(a, x), 1.0)
    return 1.0 - q, q


def reg_gamma_p_array(a: float, x: np.ndarray) -> np.ndarray:
    """Vectorized regularized lower incomplete gamma ``P(a, x)`` for a scalar shape."""
    if not a > 0:
        raise DomainError(f"reg_gamma requires a > 0, got a={a!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("reg_gamma requires x >= 0")
    out = np.zeros_like(x)
    lga = math.lgamma(a)
    pos = x > 0
    use_series = pos & (x < a + 1.0)
    use_cf = pos & ~use_series & np.isfinite(x)
    out[np.isinf(x)] = 1.0

    if np.any(use_series):
        xs = x[use_series]
        ap = np.full_like(xs, a)
        term = np.full_like(xs, 1.0 / a)
        total = term.copy()
        for _ in range(_MAXIT):
            ap += 1.0
            term *= xs / ap
            total += term
            if np.all(np.abs(term) <= np.abs(total) * _EPS):
                break
        else:
            raise ArithmeticError("vectorized incomplete gamma series did not converge")
        out[use_series] = np.minimum(total * np.exp(a * np.log(xs) - xs - lga), 1.0)

    if np.any(use_cf):
        xs = x[use_cf]
        b = xs + 1.0 - a
        c = np.full_like(xs, 1.0 / _FPMIN)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, _MAXIT):
            an = -i * (i - a)
            b = b + 2.0
            d = an * d + b
            d[np.abs(d) < _FPMIN] = _FPMIN
            c = b + an / c
            c[np.abs(c) < _FPMIN] = _FPMIN
            d = 1.0 / d
            delta = d * c
            h *= delta
            if np.all(np.abs(delta - 1.0) <= 4.0 * _EPS):
                break
        else:
            raise ArithmeticError("vectorized incomplete gamma continued fraction did not converge")
        q = np.minimum(h * np.exp(a * np.log(xs) - xs - lga), 1.0)
        out[use_cf] = 1.0 - q
    return out


def gamma_pdf(a: float, x: float) -> float:
    """Density of the unit-scale gamma law with shape ``a`` at ``x``."""
    if x <= 0.0:
        return 0.0 if a >= 1.0 or x < 0.0 else math.inf
    if math.isinf(x):
        return 0.0
    return math.exp((a - 1.0) * math.log(x) - x - math.lgamma(a))


def inv_reg_lower_gamma(a: float, p: float) -> float:
    """Solve ``P(a, x) = p`` for ``x``.

    Newton steps on the exact derivative, kept inside a bracket that is grown
    by doubling until it straddles the target.
    """
    if not a > 0 or math.isinf(a):
        raise DomainError(f"inv_reg_lower_gamma requires a > 0, got a={a!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"inv_reg_lower_gamma requires 0 < p < 1, got p={p!r}")

    hi = max(2.0 * a, 1.0)
    while reg_gamma(a, hi)[0] < p:
        hi *= 2.0
    # halve down to the root's scale so the tolerance below is relative
    while hi > 1e-300 and reg_gamma(a, 0.5 * hi)[0] >= p:
        hi *= 0.5
    lo = 0.5 * hi

    def f(x: float) -> float:
        return reg_gamma(a, x)[0] - p

    return find_root(f, Bracket(lo, hi), tol=1e-15 * hi, fprime=lambda x: gamma_pdf(a, x))


def std_normal_q(z: float) -> float:
    """Standard Gaussian upper tail ``Q(z) = Pr(Z > z)``."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def inv_std_normal_q(p: float) -> float:
    """Inverse of :func:`std_normal_q`."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"inv_std_normal_q requires 0 < p < 1, got p={p!r}")
    return -_STD_NORMAL.inv_cdf(p)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise BracketError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


def find_root(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: float = 1e-12,
    fprime: Optional[Callable[[float], float]] = None,
    maxiter: int = 1000,
) -> float:
    """Root of ``f`` inside ``bracket``.

    Newton steps are taken when ``fprime`` is given and the step stays inside
    the current bracket while shrinking it fast enough; otherwise the step is a
    bisection. The returned point always lies in ``[bracket.lo, bracket.hi]``.

    Raises
    ------
    BracketError
        If ``f`` has the same sign at both ends.
    """
    lo, hi = bracket.lo, bracket.hi
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.isnan(flo) or math.isnan(fhi) or (flo > 0) == (fhi > 0):
        raise BracketError(f"f({lo})={flo} and f({hi})={fhi} do not bracket a root")
    neg_at_lo = flo < 0

    x = 0.5 * (lo + hi)
    step_old = hi - lo
    step = step_old
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx < 0) == neg_at_lo:
            lo = x
        else:
            hi = x

        x_new = None
        if fprime is not None:
            d = fprime(x)
            if d != 0.0 and math.isfinite(d):
                cand = x - fx / d
                if lo < cand < hi and abs(2.0 * (cand - x)) <= abs(step_old):
                    x_new = cand
        step_old = step
        if x_new is None:
            x_new = 0.5 * (lo + hi)
        step = x_new - x

        if hi - lo <= tol or abs(step) <= tol or x_new == x:
            return min(max(x_new, bracket.lo), bracket.hi)
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            # bracket exhausted at float resolution
            return x_new
        x = x_new
    return x
