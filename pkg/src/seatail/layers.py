"""Region maps and boundary curves of the dominance regimes.

The chain discriminant (A^0)^2 - (A^r)^2 - (A^b)^2 changes sign at the
layer boundaries; all curves here are located by bracketed bisection on
the discriminant of the fast-path chain, seeded from the closed-form
scaling predictions.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import chain, continuum, projector
from .errors import NoBracket, RangeError

__all__ = [
    "LayerMap",
    "discriminant_at",
    "boundary_s1",
    "boundary_layer",
    "vector_dominated_windows",
    "toy_boundary_s1",
    "toy_cusp_radius",
    "cusp_boundary",
    "shear_asymptote",
    "layer_map",
    "predicted_scalings",
]


@dataclass
class LayerMap:
    r_grid: np.ndarray
    s_grid: np.ndarray
    labels: np.ndarray          # regime label per (r, s) cell
    boundaries: dict            # name -> list of (r, s)
    meta: dict = field(default_factory=dict)


def discriminant_at(scheme, gen, r, s_values):
    """Chain discriminant at light-cone coordinates s (fixed r), vectorized."""
    s_values = np.asarray(s_values, dtype=float)
    ps, p0, pr = projector.eval_projector_components(scheme, gen, s_values + r, r)
    a_s, a_0, a_r, a_b = chain.chain_components(ps, p0, pr)
    return a_0.real**2 - a_r.real**2 - a_b.real**2


def _bisect_on_s(scheme, gen, r, lo, hi, f_lo, f_hi, iters=60, rel_tol=1e-6):
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        fm = float(discriminant_at(scheme, gen, r, np.array([mid]))[0])
        if np.sign(fm) == np.sign(f_lo):
            lo, f_lo = mid, fm
        else:
            hi, f_hi = mid, fm
        if hi / lo - 1.0 < rel_tol:
            break
    return math.sqrt(lo * hi)


def boundary_s1(scheme, gen, r, seed=None, span=10.0, n_scan=120):
    """Boundary s1(r) of the low-s bilinear zone, by bisection in s.

    The boundary is the bilinear-to-vector crossing that terminates the
    contiguous bilinear-dominated region stretching up from s ~ eps;
    crossings of thin slivers further out (around the vector zero) are
    ignored by requiring a sustained positive run after the crossing.
    ``seed`` centres the geometric search window (seed/span, seed*span).
    """
    if seed is not None:
        lo, hi = seed / span, min(seed * span, 0.9 * r)
    else:
        lo, hi = 2.0 * scheme.eps, 0.8 * r
    grid = np.geomspace(lo, hi, n_scan)
    disc = discriminant_at(scheme, gen, r, grid)
    sign = np.sign(disc)
    idx = np.where((sign[:-1] < 0) & (sign[1:] > 0))[0]
    if len(idx) == 0:
        raise NoBracket(f"no bilinear->vector crossing in ({lo:g}, {hi:g}) at r={r}")
    run_need = max(3, n_scan // 24)
    for i in idx:
        run = 0
        j = i + 1
        while j < len(grid) and sign[j] > 0:
            run += 1
            j += 1
        if run >= run_need:
            return _bisect_on_s(scheme, gen, r, grid[i], grid[i + 1], disc[i], disc[i + 1])
    i = idx[0]
    return _bisect_on_s(scheme, gen, r, grid[i], grid[i + 1], disc[i], disc[i + 1])


def vector_dominated_windows(scheme, gen, r, s_max, s_min=None, n_scan=400):
    """All (lo, hi) subintervals of (s_min, s_max) with positive discriminant."""
    if s_min is None:
        s_min = 2.0 * scheme.eps
    grid = np.geomspace(s_min, s_max, n_scan)
    disc = discriminant_at(scheme, gen, r, grid)
    pos = disc > 0
    windows = []
    i = 0
    while i < len(grid):
        if pos[i]:
            j = i
            while j + 1 < len(grid) and pos[j + 1]:
                j += 1
            lo = grid[i]
            hi = grid[j]
            if i > 0:
                lo = _bisect_on_s(scheme, gen, r, grid[i - 1], grid[i], disc[i - 1], disc[i])
            if j + 1 < len(grid):
                hi = _bisect_on_s(scheme, gen, r, grid[j], grid[j + 1], disc[j], disc[j + 1])
            windows.append((lo, hi))
            i = j + 1
        else:
            i += 1
    return windows


def boundary_layer(scheme, gen, r, which, predicted=None, span=8.0):
    """Centre and width of an inner vector-dominated band.

    ``which`` picks s2/s3/s4 through the predicted scalings in the scheme
    metadata (or an explicit ``predicted`` centre); both edges are
    bracketed inside (predicted/span, predicted*span).
    """
    if predicted is None:
        pred = scheme_predictions(scheme)
        predicted = pred[which](r)
    lo, hi = predicted / span, predicted * span
    grid = np.geomspace(lo, hi, 160)
    disc = discriminant_at(scheme, gen, r, grid)
    pos = disc > 0
    if not np.any(pos):
        raise NoBracket(f"no vector-dominated band near {which}={predicted:g} at r={r}")
    idx = np.where(pos)[0]
    i0, i1 = idx[0], idx[-1]
    if i0 == 0 or i1 == len(grid) - 1:
        raise NoBracket(f"band near {which} not contained in the search window")
    lo_edge = _bisect_on_s(scheme, gen, r, grid[i0 - 1], grid[i0], disc[i0 - 1], disc[i0])
    hi_edge = _bisect_on_s(scheme, gen, r, grid[i1], grid[i1 + 1], disc[i1], disc[i1 + 1])
    return 0.5 * (lo_edge + hi_edge), hi_edge - lo_edge


def scheme_predictions(scheme):
    """Closed-form layer-scale predictions attached to an assembled scheme."""
    meta = getattr(scheme, "_predictions", None)
    if meta is None:
        raise RangeError("scheme carries no layer predictions; pass `predicted`")
    return meta


# ---------------------------------------------------------------------------
# toy closed forms
# ---------------------------------------------------------------------------

def toy_boundary_s1(gen, gamma, delta, r):
    """Closed-form boundary of the single-tail toy scheme.

    Derived from the bilinear/vector balance sqrt(2s/r)|A^0| = |A^b| of the
    leading chain components; carries the (gamma - 1) factor of the
    bilinear coefficient.
    """
    if len(gen.masses) != 1:
        raise RangeError("toy boundary assumes a single sea")
    m = gen.masses[0] * gen.weights[0] ** (2 / 3)  # weights fold into m^3
    c = 32 * math.pi**2 * (gamma - 1.0) * abs(math.cos(math.pi * gamma / 2.0))
    amp = (c * delta / (math.sqrt(2.0) * m**3)) ** (2.0 / (2 * gamma + 1.0))
    return amp * r ** (-3.0 / (2 * gamma + 1.0))


def toy_cusp_radius(gen, gamma, delta, t):
    """Closed-form vector-dominated cusp boundary r(t) near the origin."""
    if len(gen.masses) != 1:
        raise RangeError("toy cusp assumes a single sea")
    m = gen.masses[0] * gen.weights[0] ** (2 / 3)
    sec = 1.0 / abs(math.cos(math.pi * gamma / 2.0))
    return (
        3.0 * m**3 * sec / (64 * math.pi**2 * gamma * (gamma**2 - 1.0))
        * abs(t) ** (3.0 + gamma) / delta
    )


def cusp_boundary(scheme, gen, t, seed=None, span=30.0):
    """Root in r of the small-r discriminant at fixed t (origin window)."""
    if seed is None:
        seed = abs(t) ** 2
    lo, hi = seed / span, seed * span

    def disc(r):
        ps, p0, pr = projector.eval_projector_smallr(scheme, gen, np.array([t]), r)
        a_s, a_0, a_r, a_b = chain.chain_components(ps[0], p0[0], pr[0])
        return a_0.real**2 - a_r.real**2 - a_b.real**2

    grid = np.geomspace(lo, hi, 60)
    vals = np.array([disc(r) for r in grid])
    sign = np.sign(vals)
    idx = np.where(sign[:-1] != sign[1:])[0]
    if len(idx) == 0:
        raise NoBracket(f"no cusp crossing in ({lo:g},{hi:g}) at t={t}")
    i = idx[0]
    a, b = grid[i], grid[i + 1]
    fa = vals[i]
    for _ in range(60):
        mid = math.sqrt(a * b)
        fm = disc(mid)
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b = mid
        if b / a - 1 < 1e-6:
            break
    return math.sqrt(a * b)


def shear_asymptote(scheme, gen, r_grid, gamma=None):
    """Fitted (theta, correction exponent) of s1(r) ~ theta r + c r^-(2g+3).

    theta from the largest radii; the correction exponent from a log-log
    fit of |s1 - theta r| after subtracting the fitted linear part.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    s1 = []
    theta0 = scheme.shear.theta if scheme.shear is not None else 0.1
    for r in r_grid:
        s1.append(boundary_s1(scheme, gen, r, seed=theta0 * r if scheme.shear else None))
    s1 = np.array(s1)
    # theta from the top decade (corrections die fastest there)
    top = r_grid >= r_grid.max() / 2.5
    theta = float(np.sum(s1[top] * r_grid[top]) / np.sum(r_grid[top] ** 2))
    resid = s1 - theta * r_grid
    mask = np.abs(resid) > 1e-14 * s1
    if np.count_nonzero(mask) < 3:
        return theta, float("nan")
    slope = np.polyfit(np.log(r_grid[mask]), np.log(np.abs(resid[mask])), 1)[0]
    return theta, float(slope)


def layer_map(scheme, gen, r_grid, s_grid):
    """Full classification grid plus extracted boundary curves."""
    r_grid = np.asarray(r_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)
    labels = np.empty((len(r_grid), len(s_grid)), dtype=object)
    for i, r in enumerate(r_grid):
        disc = discriminant_at(scheme, gen, r, s_grid)
        ps, p0, pr = projector.eval_projector_components(scheme, gen, s_grid + r, r)
        a_s, a_0, a_r, a_b = chain.chain_components(ps, p0, pr)
        norm2 = a_s.real**2 + a_0.real**2 + a_r.real**2 + a_b.real**2
        tol = chain.DEGENERACY_TOL * norm2 + 1e-280
        lab = np.where(disc > tol, chain.VECTOR_DOMINATED,
                       np.where(disc < -tol, chain.BILINEAR_DOMINATED, chain.DEGENERATE))
        labels[i] = lab
    boundaries = {"s1": []}
    for r in r_grid:
        try:
            boundaries["s1"].append((float(r), boundary_s1(scheme, gen, r)))
        except NoBracket:
            pass
    return LayerMap(r_grid, s_grid, labels, boundaries,
                    meta={"scheme": projector.scheme_hash(scheme, gen), "eps": scheme.eps})


# ---------------------------------------------------------------------------
# closed-form scaling table
# ---------------------------------------------------------------------------

def predicted_scalings(eps, alpha, theta=None, tau=None, sigma=None):
    """Closed-form layer scales and validity radii of the constructions.

    Raises RangeError outside 1 < alpha < 3/2, alpha < theta < 2,
    3 < tau < 15/4, 8 < sigma < 9.
    """
    if not (1.0 < alpha < 1.5):
        raise RangeError("alpha must lie in (1, 3/2)")
    out = {
        "s1": lambda r: eps ** (1 / 64) * r ** (-1 / alpha),
        "r0": eps ** (alpha / (64 * (alpha + 1))),
        "r1": min(eps ** (-alpha / 32), eps ** (-alpha / (64 * (alpha - 1)))),
    }
    if theta is not None:
        if not (alpha < theta < 2.0):
            raise RangeError("theta must lie in (alpha, 2)")
        if tau is None or not (3.0 < tau < 3.75):
            raise RangeError("tau must lie in (3, 15/4)")
        out.update(
            s2=lambda r: eps ** (1 / 16) * r ** (-1 / alpha),
            ds2=lambda r: eps ** (5 / 64) * r ** (-(2 - alpha + theta) / (2 * alpha)),
            s3=lambda r: eps ** (3 / 32) * r ** ((2 + theta) / alpha),
            ds3=lambda r: eps ** (1 / 8)
            * r ** (0.5 + (2 + theta) * (5 + 2 * tau) / (2 * alpha)),
            r0_layers=eps ** (alpha / (64 * (2 + theta))),
            r2=eps ** (-alpha / 64),
            r3=eps ** (-alpha / (64 * (2 + theta))),
        )
    if sigma is not None:
        if not (8.0 < sigma < 9.0):
            raise RangeError("sigma must lie in (8, 9)")
        out.update(
            s4=lambda r: eps ** (31 / 64) * r ** (-13.0 / (3 + 2 * sigma)),
            ds4=lambda r: eps * r ** (-(24.0 + 3 * sigma) / (3 + 2 * sigma)),
            r4=eps ** (-(3 + 2 * sigma) / 832.0),
        )
    if theta is not None:
        out["r_inf"] = eps ** (-alpha / 64)
        out["theta_shear"] = eps ** (1 / 32 + alpha / 64)
    return out
