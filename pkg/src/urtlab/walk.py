"""Exact distance law of the lazy random walk on the d-regular tree.

The walk stays put with probability 1/2 and moves to each of the d neighbors
with probability 1/(2d).  Its distance from the start is a birth-death chain:
from 0 it moves to 1 with probability 1/2; from r >= 1 it moves to r+1 with
probability (d-1)/(2d), to r-1 with probability 1/(2d), and stays with
probability 1/2.  All probabilities are kept as natural logs: the interesting
quantities decay like rho^n and underflow 64-bit floats within a few thousand
steps otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import PreconditionError, ValidationError

DEFAULT_KERNEL_STEPS = 4096


class DistanceKernel:
    """Table logq[n][r] = log P(dist(X_n, o) = r) for n = 0..n_max."""

    __slots__ = ("d", "n_max", "_rows")

    def __init__(self, d, n_max, rows):
        self.d = d
        self.n_max = n_max
        self._rows = rows

    def logq(self, n):
        if not 0 <= n <= self.n_max:
            raise PreconditionError(f"step {n} outside kernel range 0..{self.n_max}")
        return self._rows[n]

    def row_log_total(self, n):
        return float(logsumexp(self.logq(n)))

    def mean_distance(self, n):
        row = self.logq(n)
        return float(np.sum(np.exp(row) * np.arange(n + 1)))


def _step_row(prev, log_stay, log_down, up_template):
    n = len(prev) - 1
    m = n + 1
    new = np.full(m + 1, -np.inf)
    new[:m] = prev + log_stay
    # The frontier cell receives a single term, so the identity
    # logq[n+1][n+1] = logq[n][n] + log((d-1)/(2d)) holds to the last ulp.
    new[1:] = np.logaddexp(new[1:], prev + up_template[:m])
    if m >= 2:
        new[: m - 1] = np.logaddexp(new[: m - 1], prev[1:] + log_down)
    new.flags.writeable = False
    return new


def iter_distance_rows(d, n_max):
    """Stream (n, logq_row) with O(n) memory; row arrays are read-only."""
    if d < 3:
        raise ValidationError(f"need d >= 3, got {d}")
    if n_max < 1:
        raise ValidationError(f"need at least one step, got {n_max}")
    log_stay = math.log(0.5)
    log_down = -math.log(2 * d)
    up_template = np.full(n_max + 1, math.log((d - 1) / (2 * d)))
    up_template[0] = math.log(0.5)
    row = np.zeros(1)
    row.flags.writeable = False
    yield 0, row
    for n in range(n_max):
        row = _step_row(row, log_stay, log_down, up_template)
        yield n + 1, row


def build_kernel(d, n_max=DEFAULT_KERNEL_STEPS):
    """Exact log-domain distance table; O(n_max^2) time and space."""
    rows = [row for _, row in iter_distance_rows(d, n_max)]
    return DistanceKernel(d, n_max, tuple(rows))


def point_probability(kernel, n, r):
    """log P(X_n = x) for any fixed vertex x at distance r from the start.

    By spherical symmetry this is logq[n][r] minus the log sphere size
    d (d-1)^(r-1) (and logq[n][0] itself at r = 0).
    """
    if not 0 <= n <= kernel.n_max:
        raise PreconditionError(f"step {n} outside kernel range 0..{kernel.n_max}")
    if not 0 <= r <= n:
        raise PreconditionError(f"distance {r} outside 0..{n}")
    row = kernel.logq(n)
    if r == 0:
        return float(row[0])
    d = kernel.d
    return float(row[r] - (math.log(d) + (r - 1) * math.log(d - 1)))


@dataclass(frozen=True)
class ReturnSeries:
    """log p_n of the walk returning to the cluster, n = 0..len-1."""

    d: int
    log_p: tuple
    source: str = ""

    def __post_init__(self):
        if len(self.log_p) == 0:
            raise ValidationError("empty return series")
        if self.log_p[0] != 0.0:
            raise ValidationError("p_0 must equal 1")
        if any(x > 1e-9 for x in self.log_p):
            raise ValidationError("return probabilities must not exceed 1")
        if any(math.isinf(x) for x in self.log_p):
            raise ValidationError("return probabilities must be positive")

    @property
    def n_max(self):
        return len(self.log_p) - 1


def return_series(profile, kernel, source=""):
    """Return-probability series p_n = sum_r q_n(r) a_r, in log domain."""
    if profile.d != kernel.d:
        raise ValidationError(
            f"profile degree {profile.d} differs from kernel degree {kernel.d}"
        )
    if profile.horizon < kernel.n_max:
        raise PreconditionError(
            f"profile horizon {profile.horizon} shorter than kernel {kernel.n_max}"
        )
    log_a = np.asarray(profile.log_a[: kernel.n_max + 1])
    out = [0.0]
    for n in range(1, kernel.n_max + 1):
        out.append(float(logsumexp(kernel.logq(n) + log_a[: n + 1])))
    return ReturnSeries(kernel.d, tuple(out), source=source)


def mc_distance_walk(d, steps, seed, stream_index=0):
    """Simulate one trajectory of the distance chain; deterministic given seed."""
    from .rng import stream

    if steps < 1:
        raise ValidationError(f"need steps >= 1, got {steps}")
    rng = stream(seed, stream_index)
    up0 = 0.5
    stay_hi = 0.5
    up_hi = 0.5 + (d - 1) / (2 * d)
    out = np.zeros(steps + 1, dtype=np.int64)
    r = 0
    for n in range(1, steps + 1):
        u = rng.random()
        if r == 0:
            if u >= up0:
                r = 1
        elif u >= stay_hi:
            r = r + 1 if u < up_hi else r - 1
        out[n] = r
    return out


def mc_distance_histogram(d, n, runs, seed, stream_index=0):
    """Counts of dist(X_n, o) over ``runs`` independent walkers (vectorized)."""
    from .rng import stream

    rng = stream(seed, stream_index)
    pos = np.zeros(runs, dtype=np.int64)
    up_hi = 0.5 + (d - 1) / (2 * d)
    for _ in range(n):
        u = rng.random(runs)
        at_zero = pos == 0
        pos = np.where(at_zero & (u >= 0.5), 1, pos)
        moving = ~at_zero & (u >= 0.5)
        pos = pos + moving * np.where(u < up_hi, 1, -1)
    return np.bincount(pos, minlength=n + 1)
