"""Mass-transport functionals along the 2^p 3^q time grid and exponent estimators.

The two functionals attached to a cluster E(x) and even time 2l are

    f1(x, 2l) = sum_{y in E(x)} p_2l(x, y) / pE_2l(y)
    f2(x, 2l) = pE_2l(x) * sum_{y in E(x)} p_2l(x, y)
                 / sum_{z in E(x)} p_2l(y, z) pE_2l(z)

where p_k(x, y) is the ambient lazy-walk transition probability (a function
of the tree distance only) and pE_k(x) = sum_{y in E(x)} p_k(x, y).  Both have
expectation 1 under any automorphism-invariant percolation, and both control
the doubling/tripling of return probabilities through Cauchy-Schwarz:

    pE_2l(x)^2 <= f1(x, 2l) pE_4l(x),      pE_2l(x)^3 <= f2(x, 2l) pE_6l(x).

Chaining these along times 2^(p+1) 3^q l produces the certificate C_{p,q}
with  pE_2l(x)^(2^p 3^q) <= C_{p,q}(x, 2l) pE_{2^(p+1) 3^q l}(x).

All per-window computations here are exact (per-vertex BFS, log domain);
randomness only enters through cluster sampling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import PreconditionError, ValidationError, WindowRadiusError
from .walk import build_kernel, point_probability


def _require_radius(window, vertex, reach, what):
    dist = window.depths.get(vertex)
    if dist is None:
        raise ValidationError(f"vertex {vertex} not in the window")
    if dist + reach > window.horizon:
        raise WindowRadiusError(
            f"{what} needs window radius >= dist(root, {vertex}) + {reach} "
            f"= {dist + reach}, but horizon is {window.horizon}"
        )


def _local_spheres(window, vertex, radius):
    """Sphere counts of the cluster around ``vertex`` up to ``radius``."""
    dist = window.distances_from(vertex, limit=radius)
    counts = [0] * (radius + 1)
    for _, dv in dist.items():
        counts[dv] += 1
    return counts, dist


def cluster_return_prob(window, vertex, n_steps, kernel):
    """log pE_n(vertex) = log sum over cluster vertices of p_n(vertex, .).

    Exact provided the window stores the complete cluster ball of radius
    ``n_steps`` around ``vertex``; the radius precondition enforces that.
    """
    _require_radius(window, vertex, n_steps, "cluster return probability")
    counts, _ = _local_spheres(window, vertex, n_steps)
    terms = [
        math.log(c) + point_probability(kernel, n_steps, r)
        for r, c in enumerate(counts)
        if c > 0
    ]
    return float(logsumexp(terms))


def f1(window, x, two_l, kernel):
    """First mass-transport functional of the cluster of x at even time two_l."""
    _require_radius(window, x, 2 * two_l, "f1")
    _, dist_x = _local_spheres(window, x, two_l)
    log_terms = []
    for y, dxy in dist_x.items():
        log_pe_y = cluster_return_prob(window, y, two_l, kernel)
        log_terms.append(point_probability(kernel, two_l, dxy) - log_pe_y)
    return float(math.exp(logsumexp(log_terms)))


def f2(window, x, two_l, kernel):
    """Second mass-transport functional of the cluster of x at even time two_l."""
    _require_radius(window, x, 3 * two_l, "f2")
    _, dist_x = _local_spheres(window, x, two_l)
    # pE_2l(z) for every z within 2*two_l of x covers all inner sums below.
    far = window.distances_from(x, limit=2 * two_l)
    log_pe = {z: cluster_return_prob(window, z, two_l, kernel) for z in far}
    log_terms = []
    for y, dxy in dist_x.items():
        dist_y = window.distances_from(y, limit=two_l)
        inner = [
            point_probability(kernel, two_l, dyz) + log_pe[z]
            for z, dyz in dist_y.items()
        ]
        log_terms.append(point_probability(kernel, two_l, dxy) - logsumexp(inner))
    log_pe_x = log_pe[x]
    return float(math.exp(log_pe_x + logsumexp(log_terms)))


@dataclass(frozen=True)
class TwoThreeSample:
    """Exact per-cluster record of the functionals and their slack inequalities."""

    f1: float
    f2: float
    p_2l: float
    p_4l: float
    p_6l: float
    slack1: float
    slack2: float


def two_three_sample(window, x, l, kernel, slack_floor=-1e-10):
    """Evaluate f1, f2, the return probabilities, and both Cauchy-Schwarz slacks.

    Any slack below ``slack_floor`` indicates a genuine violation (the
    tolerance only absorbs log-domain rounding) and raises.
    """
    _require_radius(window, x, 6 * l, "2-3 sample")
    v1 = f1(window, x, 2 * l, kernel)
    v2 = f2(window, x, 2 * l, kernel)
    p2 = math.exp(cluster_return_prob(window, x, 2 * l, kernel))
    p4 = math.exp(cluster_return_prob(window, x, 4 * l, kernel))
    p6 = math.exp(cluster_return_prob(window, x, 6 * l, kernel))
    slack1 = v1 * p4 - p2 * p2
    slack2 = v2 * p6 - p2 * p2 * p2
    if slack1 < slack_floor or slack2 < slack_floor:
        raise ValidationError(
            f"Cauchy-Schwarz slack violated: slack1={slack1}, slack2={slack2}"
        )
    return TwoThreeSample(v1, v2, p2, p4, p6, slack1, slack2)


@dataclass(frozen=True)
class TwoThreeAudit:
    """Monte Carlo audit of E[f1] = E[f2] = 1 over sampled clusters."""

    l: int
    samples: tuple

    @property
    def n(self):
        return len(self.samples)

    def _stats(self, values):
        arr = np.asarray(values)
        mean = float(arr.mean())
        se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        return mean, se

    @property
    def mean_f1(self):
        return self._stats([s.f1 for s in self.samples])[0]

    @property
    def se_f1(self):
        return self._stats([s.f1 for s in self.samples])[1]

    @property
    def mean_f2(self):
        return self._stats([s.f2 for s in self.samples])[0]

    @property
    def se_f2(self):
        return self._stats([s.f2 for s in self.samples])[1]

    @property
    def min_slack1(self):
        return min(s.slack1 for s in self.samples)

    @property
    def min_slack2(self):
        return min(s.slack2 for s in self.samples)

    def passed(self, n_se=3.0):
        ok1 = abs(self.mean_f1 - 1.0) <= n_se * self.se_f1
        ok2 = abs(self.mean_f2 - 1.0) <= n_se * self.se_f2
        return ok1 and ok2


def _audit_chunk(args):
    d, p, l, seed, start, stop = args
    from .generate import PercolationParams, bernoulli_cluster

    kernel = build_kernel(d, 6 * l)
    params = PercolationParams(d=d, p=p, window_radius=6 * l, seed=seed)
    out = []
    for i in range(start, stop):
        window = bernoulli_cluster(params, stream_index=i)
        out.append(two_three_sample(window, window.root, l, kernel))
    return out


def mtp_expectation_audit(d, p, l, n_samples, seed, threads=1):
    """Sample Bernoulli clusters and audit the unit expectations of f1 and f2.

    Per-sample streams are keyed by (seed, sample index), so the result is
    independent of ``threads``; chunks are reduced in index order.
    """
    if n_samples < 1:
        raise ValidationError("need at least one sample")
    if threads <= 1:
        samples = _audit_chunk((d, p, l, seed, 0, n_samples))
    else:
        bounds = np.linspace(0, n_samples, threads + 1, dtype=int)
        jobs = [
            (d, p, l, seed, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_audit_chunk, jobs))
        samples = [s for chunk in chunks for s in chunk]
    return TwoThreeAudit(l=l, samples=tuple(samples))


@dataclass(frozen=True)
class CpqCertificate:
    """Certificate C_{p,q}(x, 2l) with its chained inequality check."""

    p: int
    q: int
    l: int
    log_c: float
    factors: tuple  # (kind, time, value)
    lhs_log: float  # 2^p 3^q log pE_2l(x)
    rhs_log: float  # log C + log pE_{2^{p+1} 3^q l}(x)
    log_slack: float


def c_pq(window, l, p, q, kernel, x=None, tol=1e-9):
    """Build the 2-3 certificate at x and verify the chained inequality.

    log C = sum_i 2^(p-1-i) 3^q log f1(x, 2^(i+1) l)
          + sum_j 3^(q-1-j) log f2(x, 2^(p+1) 3^j l).
    Radius preconditions are enforced by the underlying f1/f2/return calls.
    """
    if p < 0 or q < 0 or l < 1:
        raise ValidationError("need p, q >= 0 and l >= 1")
    if x is None:
        x = window.root
    factors = []
    log_c = 0.0
    for i in range(p):
        t = 2 ** (i + 1) * l
        v = f1(window, x, t, kernel)
        factors.append(("f1", t, v))
        log_c += (2 ** (p - 1 - i)) * (3**q) * math.log(v)
    for j in range(q):
        t = 2 ** (p + 1) * 3**j * l
        v = f2(window, x, t, kernel)
        factors.append(("f2", t, v))
        log_c += (3 ** (q - 1 - j)) * math.log(v)
    lhs = (2**p) * (3**q) * cluster_return_prob(window, x, 2 * l, kernel)
    final_time = 2 ** (p + 1) * 3**q * l
    rhs = log_c + cluster_return_prob(window, x, final_time, kernel)
    slack = rhs - lhs
    if slack < -tol:
        raise ValidationError(f"certificate inequality violated by {slack}")
    return CpqCertificate(
        p=p, q=q, l=l, log_c=log_c, factors=tuple(factors),
        lhs_log=lhs, rhs_log=rhs, log_slack=slack,
    )


# ---------------------------------------------------------------------------
# Exponent estimation from return series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentEstimate:
    """A return-exponent estimate with diagnostics and optional certificate."""

    d: int
    log_rho_lazy: float
    method: str
    diagnostics: tuple
    certificate: tuple | None = None

    def __post_init__(self):
        if not self.diagnostics:
            raise ValidationError("diagnostics must be nonempty")
        if not -1e-12 <= math.exp(self.log_rho_lazy) <= 1.0 + 1e-9:
            raise ValidationError("exponent outside (0, 1]")

    @property
    def rho_lazy(self):
        return math.exp(self.log_rho_lazy)


def exponent_estimate(series, method, ratio_window=None, grid_base_l=None):
    """Estimate the lazy return exponent from a return series.

    direct:  log p_{2n} / (2n) at the last even index.
    ratio:   (1/2)(log p_{2n} - log p_{2n-2}) averaged over the last
             ceil(N/8) even indices; the telescoping cancels the polynomial
             prefactor of p_n, suppressing the O(log n / n) bias of the
             direct method.
    grid23:  supremum of the lower bounds implied by the certificate chain
             along times 2^(p+1) 3^q l; from a bare series the functionals
             are filled with their tight Cauchy-Schwarz values
             f1_hat(2L) = p_2L^2 / p_4L and f2_hat(2L) = p_2L^3 / p_6L,
             for which the chain telescopes to equality.
    """
    n_max = series.n_max
    if n_max < 64:
        raise PreconditionError(f"series length {n_max} < 64 is too short to estimate")
    log_p = series.log_p
    if method == "direct":
        n = n_max - (n_max % 2)
        diagnostics = tuple(
            (m, log_p[m] / m) for m in range(max(2, n - 30), n + 1, 2)
        )
        return ExponentEstimate(series.d, log_p[n] / n, "direct", diagnostics)
    if method == "ratio":
        window = ratio_window if ratio_window is not None else -(-n_max // 8)
        evens = [m for m in range(2, n_max + 1, 2)]
        tail = evens[-window:]
        diagnostics = tuple((m, 0.5 * (log_p[m] - log_p[m - 2])) for m in tail)
        est = sum(v for _, v in diagnostics) / len(diagnostics)
        return ExponentEstimate(series.d, est, "ratio", diagnostics)
    if method == "grid23":
        l = grid_base_l if grid_base_l is not None else max(1, n_max // 64)
        if 12 * l > n_max:
            raise PreconditionError("series too short for the chosen grid base")
        diagnostics = []
        certificate = []
        best = None
        pq = [
            (p, q)
            for p in range(0, 40)
            for q in range(0, 25)
            if 2 ** (p + 1) * 3**q * l <= n_max
        ]
        for p, q in sorted(pq, key=lambda t: 2 ** (t[0] + 1) * 3 ** t[1]):
            log_c = 0.0
            for i in range(p):
                t = 2 ** (i + 1) * l
                log_f1_hat = 2.0 * log_p[t] - log_p[2 * t]
                log_c += (2 ** (p - 1 - i)) * (3**q) * log_f1_hat
            for j in range(q):
                t = 2 ** (p + 1) * 3**j * l
                log_f2_hat = 3.0 * log_p[t] - log_p[3 * t]
                log_c += (3 ** (q - 1 - j)) * log_f2_hat
            n_pq = 2 ** (p + 1) * 3**q * l
            bound = ((2**p) * (3**q) * log_p[2 * l] - log_c) / n_pq
            certificate.append((p, q, n_pq, log_c, bound))
            diagnostics.append((n_pq, bound))
            if best is None or bound > best:
                best = bound
        return ExponentEstimate(
            series.d, best, "grid23", tuple(diagnostics), tuple(certificate)
        )
    raise ValidationError(f"unknown estimation method {method!r}")


def l0_diagnostic(window, x, kernel, l_max):
    """First l <= l_max with f1(x, 2l) <= l^2 and f2(x, 2l) <= l^2, or None.

    Purely empirical: reports the first index where the polynomial bound on
    the functionals kicks in for this particular cluster.
    """
    for l in range(1, l_max + 1):
        if f1(window, x, 2 * l, kernel) <= l * l and f2(window, x, 2 * l, kernel) <= l * l:
            return l
    return None


# ---------------------------------------------------------------------------
# Cone convergence diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeDiagnostic:
    """Finite-horizon view of the cone argument for existence of lim alpha_n/n.

    ``ell[n]`` is max over r <= n of F(r/n) - alpha_r/n.  The convergence
    flag reports that both the tail of alpha_n/n and the tail of ell have
    stabilized below the given tolerances; it is a diagnostic, not a proof.
    """

    liminf_estimate: float
    limsup_estimate: float
    ell: tuple
    converged: bool
    tail_spread: float
    ell_spread: float


def cone_diagnostic(alpha, big_f, lipschitz, tol_alpha=5e-3, tol_ell=5e-3):
    """Diagnose convergence of alpha_n/n against a concave comparison function.

    Verifies |alpha_{n+1} - alpha_n| <= lipschitz on input (reporting the
    offending index otherwise), then computes the ell sequence and tail
    min/max of alpha_n/n over the last quarter.
    """
    alpha = np.asarray(alpha, dtype=float)
    n_max = len(alpha) - 1
    if n_max < 8:
        raise ValidationError("need at least 9 terms for a cone diagnostic")
    steps = np.abs(np.diff(alpha))
    bad = np.nonzero(steps > lipschitz + 1e-12)[0]
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"Lipschitz violation at index {i}: |alpha_{i + 1} - alpha_{i}| = "
            f"{steps[i]} > {lipschitz}"
        )

    def f_values(ts):
        try:
            vals = np.asarray(big_f(ts), dtype=float)
            if vals.shape != ts.shape:
                raise ValueError
            return vals
        except (TypeError, ValueError):
            return np.array([float(big_f(float(t))) for t in ts])

    ell = []
    for n in range(1, n_max + 1):
        r = np.arange(n + 1)
        ell.append(float(np.max(f_values(r / n) - alpha[: n + 1] / n)))
    ratios = alpha[1:] / np.arange(1, n_max + 1)
    tail_len = max(2, n_max // 4)
    tail = ratios[-tail_len:]
    ell_tail = np.asarray(ell[-tail_len:])
    tail_spread = float(tail.max() - tail.min())
    ell_spread = float(ell_tail.max() - ell_tail.min())
    return ConeDiagnostic(
        liminf_estimate=float(tail.min()),
        limsup_estimate=float(tail.max()),
        ell=tuple(ell),
        converged=(tail_spread < tol_alpha) and (ell_spread < tol_ell),
        tail_spread=tail_spread,
        ell_spread=ell_spread,
    )
