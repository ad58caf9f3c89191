"""Co-growth formula: cluster growth rate <-> walk return exponent.

``gamma`` is the log growth rate of the (leafless) cluster.  The closed-form
two-branch relation gives the simple-walk return exponent; the lazy exponent
follows from the affine normalization bridge rho_lazy = (1 + rho_simple)/2,
which is validated numerically against the distance-kernel oracle elsewhere
in the test suite.  The variational route maximizes
rate(t) + t (gamma - log(d-1)) over [0, 1] and must agree with the closed
form; that agreement is this module's central cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .optimize import golden_max
from .rate import RateFunction


@dataclass(frozen=True)
class CogrowthResult:
    d: int
    gamma: float
    rho_simple: float
    rho_lazy: float
    branch: str
    threshold: float

    def __post_init__(self):
        lo = 2.0 * math.sqrt(self.d - 1) / self.d
        if not (lo - 1e-12 <= self.rho_simple <= 1.0 + 1e-12):
            raise ValidationError("rho_simple outside [2 sqrt(d-1)/d, 1]")
        if abs(self.rho_lazy - (1.0 + self.rho_simple) / 2.0) > 1e-12:
            raise ValidationError("lazy/simple normalization mismatch")


def cogrowth_rho(gamma, d):
    """Two-branch closed form for the return exponent at growth exp(gamma).

    Supercritical branch (gamma >= (1/2) log(d-1)):
    rho_simple = (sqrt(d-1)/d) (e^g / sqrt(d-1) + sqrt(d-1) / e^g);
    otherwise rho_simple = 2 sqrt(d-1)/d.  Continuous at the threshold.
    """
    if d < 3:
        raise ValidationError(f"need d >= 3, got {d}")
    if not 0.0 <= gamma <= math.log(d - 1) + 1e-12:
        raise ValidationError(f"gamma must lie in [0, log(d-1)], got {gamma}")
    threshold = 0.5 * math.log(d - 1)
    sq = math.sqrt(d - 1)
    if gamma >= threshold:
        z = math.exp(gamma)
        rho_simple = (sq / d) * (z / sq + sq / z)
        branch = "supercritical"
    else:
        rho_simple = 2.0 * sq / d
        branch = "subcritical"
    rho_simple = min(rho_simple, 1.0)
    return CogrowthResult(
        d=d,
        gamma=gamma,
        rho_simple=rho_simple,
        rho_lazy=(1.0 + rho_simple) / 2.0,
        branch=branch,
        threshold=threshold,
    )


def lazy_from_simple(rho_simple):
    if not 0.0 < rho_simple <= 1.0:
        raise ValidationError(f"rho_simple must lie in (0, 1], got {rho_simple}")
    return (1.0 + rho_simple) / 2.0


def simple_from_lazy(rho_lazy):
    if not 0.0 < rho_lazy <= 1.0:
        raise ValidationError(f"rho_lazy must lie in (0, 1], got {rho_lazy}")
    if rho_lazy < 0.5:
        raise ValidationError(
            "rho_lazy < 1/2 is impossible for a walk with stay-probability 1/2"
        )
    return 2.0 * rho_lazy - 1.0


def variational_log_rho_lazy(gamma, d, tol=1e-10):
    """log rho_lazy via the max identity, specialized to geometric profiles.

    For a profile with log a_r / r -> gamma - log(d-1) the return exponent is
    max over t of rate(t) + t (gamma - log(d-1)) = max of phi(t) + t gamma.
    The objective is concave, so golden section suffices.
    """
    if not 0.0 <= gamma <= math.log(d - 1) + 1e-12:
        raise ValidationError(f"gamma must lie in [0, log(d-1)], got {gamma}")
    rf = RateFunction(d)

    def objective(t):
        return rf.phi(t) + t * gamma

    _, val = golden_max(objective, 0.0, 1.0, tol=tol)
    return val


def invert_cogrowth(rho_simple, d):
    """Growth gamma from a supercritical return exponent (larger quadratic root).

    Solving (sqrt(d-1)/d)(z/sqrt(d-1) + sqrt(d-1)/z) = rho for z = e^gamma
    gives z^2 - d rho z + (d-1) = 0.  Below the subcritical value
    2 sqrt(d-1)/d the discriminant is negative and the growth is not
    recoverable.
    """
    if not 0.0 < rho_simple <= 1.0:
        raise ValidationError(f"rho_simple must lie in (0, 1], got {rho_simple}")
    disc = d * d * rho_simple * rho_simple - 4.0 * (d - 1)
    if disc <= 0.0:
        raise ValidationError(
            "exponent at or below the subcritical value 2 sqrt(d-1)/d; "
            "growth is not recoverable there"
        )
    z = 0.5 * (d * rho_simple + math.sqrt(disc))
    return math.log(z)
