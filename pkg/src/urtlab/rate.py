"""Large-deviation rate function of the lazy walk's distance on the d-regular tree.

``phi(t)`` is the exponential decay rate of the probability that the walk
sits at one fixed vertex at linear distance t*n after n steps; the distance
rate function adds the sphere-size entropy: rate(t) = phi(t) + t log(d-1).
Closed forms come with an independent grid oracle (golden-section
minimization of the defining variational problem).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ValidationError
from .optimize import bracketed_min, golden_max


class RateFunction:
    """Closed-form evaluators for the decay-rate functionals at a given degree."""

    def __init__(self, d):
        if int(d) != d or d < 3:
            raise ValidationError(f"rate function needs integer d >= 3, got {d}")
        self.d = int(d)
        sq = math.sqrt(d - 1)
        self.r_const = 1.0 / (0.5 + sq / d)
        self.s_const = 1.0 / (0.5 - sq / d)
        if not (1.0 < self.r_const < 2.0 < self.s_const):
            raise ValidationError("degree constants out of order; d out of range")
        self._phi0 = math.log(0.5 + sq / d)
        self._phi1 = -math.log(2 * d)
        self._log_d = math.log(d)

    # -- building blocks ----------------------------------------------------

    def _denom(self, x):
        """(1 - x/2) + sqrt((1 - x/r)(1 - x/s)), with the radicand clamped at 0.

        The defining factor F(x) = (d/((d-1)x)) ((1-x/2) - sqrt(...)) is
        algebraically identical to x / (d * denom); the rewritten form has no
        cancellation as x -> 0.
        """
        rad = (1.0 - x / self.r_const) * (1.0 - x / self.s_const)
        rad = np.where(rad < 0.0, np.where(rad >= -1e-15, 0.0, np.nan), rad)
        if np.any(np.isnan(rad)):
            raise ValidationError("argument outside [0, r]: negative radicand")
        return (1.0 - 0.5 * x) + np.sqrt(rad)

    def factor_f(self, x):
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr <= 0.0) or np.any(x_arr > self.r_const * (1 + 1e-12)):
            raise ValidationError(f"argument must lie in (0, {self.r_const}]")
        out = x_arr / (self.d * self._denom(x_arr))
        return float(out) if np.ndim(x) == 0 else out

    def log_factor_f(self, x):
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr <= 0.0) or np.any(x_arr > self.r_const * (1 + 1e-12)):
            raise ValidationError(f"argument must lie in (0, {self.r_const}]")
        out = np.log(x_arr) - self._log_d - np.log(self._denom(x_arr))
        return float(out) if np.ndim(x) == 0 else out

    def psi(self, t):
        t_arr = np.asarray(t, dtype=float)
        d = self.d
        out = np.sqrt(d * d * t_arr * t_arr + 4.0 * (d - 1) * (1.0 - t_arr * t_arr))
        return float(out) if np.ndim(t) == 0 else out

    def x_of_t(self, t):
        """Interior minimizer of the decay variational problem; x(0)=r, x(1)=0."""
        t_arr = np.asarray(t, dtype=float)
        if np.any((t_arr < 0.0) | (t_arr > 1.0)):
            raise ValidationError("t must lie in [0, 1]")
        d = self.d
        out = (2.0 * d / (d - 2) ** 2) * (d - self.psi(t_arr))
        return float(out) if np.ndim(t) == 0 else out

    # -- the rate functionals -------------------------------------------------

    def phi(self, t):
        """Point decay rate; closed form on (0,1), analytic limits at 0 and 1."""
        t_arr = np.asarray(t, dtype=float)
        if np.any((t_arr < 0.0) | (t_arr > 1.0)):
            raise ValidationError("t must lie in [0, 1]")
        with np.errstate(divide="ignore", invalid="ignore"):
            x = self.x_of_t(t_arr)
            inner = (t_arr - 1.0) * np.log(x) - t_arr * (
                self._log_d + np.log(self._denom(x))
            )
        out = np.where(
            t_arr <= 0.0, self._phi0, np.where(t_arr >= 1.0, self._phi1, inner)
        )
        return float(out) if np.ndim(t) == 0 else out

    def phi_grid(self, t, tol=1e-12):
        """Oracle for phi: direct golden-section minimization over x in (0, r]."""
        if not 0.0 <= t <= 1.0:
            raise ValidationError("t must lie in [0, 1]")
        lo = self.r_const * 1e-15

        def objective(x):
            return t * self.log_factor_f(x) - math.log(x)

        _, val = bracketed_min(objective, lo, self.r_const, n_grid=64, tol=tol)
        return val

    def phi_second(self, t):
        """phi''(t) = x'(t)/(t x(t)) = -2d/(psi(t) x(t)); strictly negative on (0,1)."""
        t_arr = np.asarray(t, dtype=float)
        if np.any((t_arr <= 0.0) | (t_arr >= 1.0)):
            raise ValidationError("second derivative defined on the open interval (0, 1)")
        out = -2.0 * self.d / (self.psi(t_arr) * self.x_of_t(t_arr))
        return float(out) if np.ndim(t) == 0 else out

    def rate(self, t):
        """Distance rate function: phi(t) + t log(d-1); nonpositive and concave."""
        t_arr = np.asarray(t, dtype=float)
        out = self.phi(t_arr) + t_arr * math.log(self.d - 1)
        return float(out) if np.ndim(t) == 0 else out

    def rate_prime_at_zero(self):
        """Right derivative of the rate at 0: (1/2) log(d-1)."""
        return 0.5 * math.log(self.d - 1)

    @property
    def speed(self):
        """Asymptotic linear speed of the lazy walk's distance: (d-2)/(2d)."""
        return (self.d - 2) / (2.0 * self.d)


def rate_argmax(rate_fn, lo=0.0, hi=1.0, tol=1e-10):
    """Argmax and max of the concave rate over [lo, hi] by golden section."""
    t_star, val = golden_max(rate_fn.rate, lo, hi, tol=tol)
    return t_star, val


@dataclass(frozen=True)
class LdpCheck:
    """Finite-n check of the interval large-deviation estimate."""

    d: int
    n: int
    a: float
    b: float
    empirical: float
    rate_max: float
    t_at_max: float
    gap: float


def ldp_check(rate_fn, kernel, a, b, n):
    """Compare (1/n) log P(an <= dist <= bn) with max of the rate on [a, b]."""
    if not 0.0 <= a < b <= 1.0:
        raise ValidationError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    if rate_fn.d != kernel.d:
        raise ValidationError("rate function and kernel degrees differ")
    row = kernel.logq(n)
    r0 = max(0, math.ceil(a * n - 1e-9))
    r1 = min(n, math.floor(b * n + 1e-9))
    if r0 > r1:
        raise ValidationError(f"interval [{a}, {b}] contains no distance at n={n}")
    empirical = float(logsumexp(row[r0 : r1 + 1])) / n
    t_star, rate_max = rate_argmax(rate_fn, a, b)
    return LdpCheck(
        d=kernel.d,
        n=n,
        a=a,
        b=b,
        empirical=empirical,
        rate_max=rate_max,
        t_at_max=t_star,
        gap=abs(empirical - rate_max),
    )
