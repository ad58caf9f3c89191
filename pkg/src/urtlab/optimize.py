"""One-dimensional golden-section search on unimodal objectives."""

import math

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(f, lo, hi, tol=1e-12, max_iter=500):
    """Minimize ``f`` on [lo, hi], assuming a single interior or boundary minimum.

    Returns ``(x, f(x))`` with the bracket shrunk below ``tol`` (absolute, in x).
    Endpoints are compared against the interior result, so an objective that is
    monotone on the interval is handled correctly.
    """
    a, b = float(lo), float(hi)
    if not b > a:
        raise ValueError(f"empty search interval [{lo}, {hi}]")
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while (b - a) > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        it += 1
    x = 0.5 * (a + b)
    candidates = [(f(x), x), (fc, c), (fd, d), (f(lo), float(lo)), (f(hi), float(hi))]
    fbest, xbest = min(candidates, key=lambda p: p[0])
    return xbest, fbest


def golden_max(f, lo, hi, tol=1e-12, max_iter=500):
    x, v = golden_min(lambda t: -f(t), lo, hi, tol, max_iter)
    return x, -v


def bracketed_min(f, lo, hi, n_grid=64, tol=1e-12):
    """Grid pre-scan to bracket the minimum, then golden-section refinement.

    Robust when the minimum may sit very close to an endpoint of (lo, hi].
    """
    xs = [lo + (hi - lo) * k / n_grid for k in range(1, n_grid + 1)]
    vals = [f(x) for x in xs]
    i = min(range(len(xs)), key=lambda k: vals[k])
    a = xs[i - 1] if i > 0 else lo
    b = xs[i + 1] if i + 1 < len(xs) else hi
    return golden_min(f, a, b, tol=tol)
