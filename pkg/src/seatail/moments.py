"""Moment extraction of the gradient field with counterterms.

The counterterm-corrected moments at radius r are

    I^0 = lim_{s0->0} [ int_{-s0}^{s0} M^0 ds + m3/(4 r s0) - (m5/2) log s0 ]
    I^r = ... + (m3/(4 r^2)) log s0 in addition
    J   = lim [ int s M ds - (m3/(4r)) log s0 ]
    K_n = lim   int s^n M ds   (n >= 2)

with m3, m5 always computed from the sea coefficients, never fitted.
For regularized schemes the limit s0 -> 0 is not taken (it must follow the
limit eps -> 0); the s0-ladder with Richardson extrapolation of the
s0-independent part serves both purposes.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import continuum
from .errors import BoundaryDetectionFailure, DomainError

__all__ = [
    "MomentSet",
    "integrate_field_moments",
    "mollified_mtilde_field",
    "mtilde_numeric_moments",
    "extrapolate_ladder",
    "numeric_moments",
    "singular_scaling_fit",
    "mollified_origin_moment",
]

_GAUSS16 = np.polynomial.legendre.leggauss(16)


@dataclass
class MomentSet:
    """I, J, K_n moments (time/radial/bilinear) with counterterm bookkeeping."""

    I0: float
    Ir: float
    Ib: float
    J0: float
    Jr: float
    Jb: float
    K: dict = field(default_factory=dict)
    m3: float = 0.0
    m5: float = 0.0
    c0: float = 0.0
    c1: float = 0.0
    s0: float = 0.0


def _counterterms(m3, m5, r, s0):
    ct_i0 = m3 / (4 * r * s0) - (m5 / 2) * math.log(s0)
    ct_ir = ct_i0 + (m3 / (4 * r**2)) * math.log(s0)
    ct_j = -(m3 / (4 * r)) * math.log(s0)
    return ct_i0, ct_ir, ct_j


def _segment_nodes(lo, hi, per_decade=24, min_intervals=12):
    """Log-spaced composite Gauss nodes/weights on (lo, hi), 0 < lo < hi."""
    x, w = _GAUSS16
    n = max(min_intervals, int(per_decade * math.log10(hi / lo)) + 1)
    edges = np.geomspace(lo, hi, n + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def integrate_field_moments(field, r, s0, n_max=3, segments=None, lo_cut=None):
    """Raw moments int s^n M ds over (0, s0) plus the counterterm pieces.

    ``field(s, r) -> (M0, Mr, Mb)`` must vanish for s < 0 (bilinear
    dominated / spacelike); ``segments`` restricts integration to the given
    (lo, hi) windows, otherwise (lo_cut, s0) is used with a tiny default
    lower cutoff.
    """
    if segments is None:
        lo = lo_cut if lo_cut is not None else 1e-12 * s0
        segments = [(lo, s0)]
    raw = np.zeros((n_max + 1, 3))
    for lo, hi in segments:
        if hi <= lo:
            continue
        pts, wts = _segment_nodes(lo, hi)
        m0, mr, mb = field(pts, r)
        for n in range(n_max + 1):
            sn = pts**n
            raw[n, 0] += np.sum(wts * sn * m0)
            raw[n, 1] += np.sum(wts * sn * mr)
            raw[n, 2] += np.sum(wts * sn * mb)
    return raw


def _moments_from_raw(raw, m3, m5, c0, c1, r, s0, n_max):
    ct_i0, ct_ir, ct_j = _counterterms(m3, m5, r, s0)
    return MomentSet(
        I0=raw[0, 0] + ct_i0,
        Ir=raw[0, 1] + ct_ir,
        Ib=raw[0, 2],
        J0=raw[1, 0] + ct_j,
        Jr=raw[1, 1] + ct_j,
        Jb=raw[1, 2],
        K={n: raw[n, 0] for n in range(2, n_max + 1)},
        m3=m3,
        m5=m5,
        c0=c0,
        c1=c1,
        s0=s0,
    )


# ---------------------------------------------------------------------------
# unregularized field, pole regularized
# ---------------------------------------------------------------------------

def regularized_potential(gen, mu, blend=None):
    """G_mu(z) = 8 phi' + 4 z phi'' of the ramped potential phi = S(z/mu) g.

    The C^3 ramp S under the log pole of g regularizes the causal field
    M^0 = d/dt [eps G_mu], M^r = -d/dr [eps G_mu] into honest functions;
    G_mu has only a mild, resolvable pole structure.
    """

    def G(z):
        z = np.asarray(z, dtype=float)
        g0, g1, g2, _ = continuum.g_bundle(np.maximum(z, 1e-300), gen, blend=blend)
        x = z / mu
        s0_ = continuum._ramp(x, 0)
        s1_ = continuum._ramp(x, 1) / mu
        s2_ = continuum._ramp(x, 2) / mu**2
        phi1 = s1_ * g0 + s0_ * g1
        phi2 = s2_ * g0 + 2 * s1_ * g1 + s0_ * g2
        out = 8.0 * phi1 + 4.0 * z * phi2
        return np.where(z > 0, out, 0.0)

    return G


def mollified_mtilde_field(gen, mu, blend=None):
    """The causal gradient field with the light-cone pole of g regularized
    on the scale z ~ mu.  Returns field(s, r) -> (M0, Mr, Mb).

    Pointwise evaluation only; moment integrals across the ramp zone
    should go through ``regularized_potential`` (see _mtilde_raw_moments),
    which avoids the huge ramp-zone cancellations.
    """

    def field(s, r):
        s = np.asarray(s, dtype=float)
        t = s + r
        z = s * (s + 2.0 * r)
        m0 = np.zeros_like(s)
        mr = np.zeros_like(s)
        inside = z > 0
        if np.any(inside):
            zi = z[inside]
            g0, g1, g2, g3 = continuum.g_bundle(zi, gen, blend=blend)
            x = zi / mu
            s0_ = continuum._ramp(x, 0)
            s1_ = continuum._ramp(x, 1) / mu
            s2_ = continuum._ramp(x, 2) / mu**2
            s3_ = continuum._ramp(x, 3) / mu**3
            phi2 = s2_ * g0 + 2 * s1_ * g1 + s0_ * g2
            phi3 = s3_ * g0 + 3 * s2_ * g1 + 3 * s1_ * g2 + s0_ * g3
            gp = 12.0 * phi2 + 4.0 * zi * phi3
            sign = np.where(t[inside] > 0, 1.0, -1.0)
            m0[inside] = sign * 2.0 * t[inside] * gp
            mr[inside] = sign * 2.0 * r * gp
        return m0, mr, np.zeros_like(s)

    return field


def _mtilde_raw_moments(gen, mu, r, s0, n_max, blend=None):
    """Raw moments of the regularized causal field on (0, s0) at radius r.

    Uses the potential form: with M^0 = d/dt [G_mu(z)] at fixed r,

        int_0^s0 s^n M^0 ds = s0^n G_mu(z0) - n int s^{n-1} G_mu ds
        int_0^s0 s^n M^r ds = r s0^n G_mu(z0)/t0
                              - int G_mu r (n s^{n-1}/t - s^n/t^2) ds,

    so only the integrable G_mu is ever quadratured.
    """
    G = regularized_potential(gen, mu, blend=blend)
    z0 = s0 * (s0 + 2.0 * r)
    g_end = float(G(np.array([z0]))[0])
    t0 = s0 + r
    s_mu = mu / (2.0 * r)
    pts, wts = _segment_nodes(s_mu * 1e-4, s0, per_decade=64)
    gv = G(pts * (pts + 2.0 * r))
    t = pts + r
    raw = np.zeros((n_max + 1, 3))
    for n in range(n_max + 1):
        if n == 0:
            raw[0, 0] = g_end
            raw[0, 1] = r * g_end / t0 + np.sum(wts * gv * r / t**2)
        else:
            raw[n, 0] = s0**n * g_end - n * np.sum(wts * pts ** (n - 1) * gv)
            raw[n, 1] = r * s0**n * g_end / t0 - np.sum(
                wts * gv * r * (n * pts ** (n - 1) / t - pts**n / t**2)
            )
    return raw


def extrapolate_ladder(s0s, values):
    """s0-independent part of values(s0) assuming a + b s0 + c s0 log s0."""
    s0s = np.asarray(s0s, dtype=float)
    values = np.asarray(values, dtype=float)
    cols = np.column_stack([np.ones_like(s0s), s0s, s0s * np.log(s0s)])
    coef, *_ = np.linalg.lstsq(cols, values, rcond=None)
    return float(coef[0])


def mtilde_numeric_moments(gen, r, s0_ladder=None, mu=None, n_max=3, blend=None):
    """Counterterm-corrected moments of the pole-regularized unregularized
    field, extrapolated in the regulator and in s0.

    The s0 ladder is kept inside the series zone of g (z = s0(s0+2r) below
    the crossover): the limits depend only on the light-cone expansion
    constants, which is what the crossover pins to the closed forms.
    """
    co = continuum.sea_coefficients(gen)
    blend_val = gen.z_cross() if blend is None else blend
    if s0_ladder is None:
        z_top = 0.45 * blend_val
        s_top = r * (math.sqrt(1.0 + z_top / r**2) - 1.0)
        s0_ladder = [s_top, 0.55 * s_top, 0.3 * s_top]
    if mu is None:
        mu = 1e-3 * min(s0_ladder) * 2 * r
    sets = []
    for s0 in s0_ladder:
        raw = _mtilde_raw_moments(gen, mu, r, s0, n_max, blend=blend)
        sets.append(_moments_from_raw(raw, co.m3, co.m5, gen.c0, gen.c1, r, s0, n_max))
    out = MomentSet(
        I0=extrapolate_ladder(s0_ladder, [m.I0 for m in sets]),
        Ir=extrapolate_ladder(s0_ladder, [m.Ir for m in sets]),
        Ib=extrapolate_ladder(s0_ladder, [m.Ib for m in sets]),
        J0=extrapolate_ladder(s0_ladder, [m.J0 for m in sets]),
        Jr=extrapolate_ladder(s0_ladder, [m.Jr for m in sets]),
        Jb=extrapolate_ladder(s0_ladder, [m.Jb for m in sets]),
        K={
            n: extrapolate_ladder(s0_ladder, [m.K[n] for m in sets])
            for n in range(2, n_max + 1)
        },
        m3=co.m3,
        m5=co.m5,
        c0=gen.c0,
        c1=gen.c1,
        s0=min(s0_ladder),
    )
    return out


# ---------------------------------------------------------------------------
# scheme moments
# ---------------------------------------------------------------------------

def scheme_gradient_field(scheme, gen):
    """field(s, r) -> gradient components of the closed chain of the
    regularized projector, vectorized over s."""
    from . import projector
    from .chain import gradient_components

    def field(s, r):
        s = np.asarray(s, dtype=float)
        ps, p0, pr = projector.eval_projector_components(scheme, gen, s + r, r)
        from .chain import chain_components

        a_s, a_0, a_r, a_b = chain_components(ps, p0, pr)
        m0, mr, mb, _ = gradient_components(
            a_s.real, a_0.real, a_r.real, a_b.real
        )
        return m0, mr, mb

    return field


def numeric_moments(scheme, gen, r, s0, n_max=3, segments=None):
    """Moments of M[A^eps] at radius r with counterterms.

    Integration is restricted to the vector-dominated windows inside
    (0, s0), located by bisection on the chain discriminant (the gradient
    vanishes identically on bilinear-dominated subintervals).
    """
    from .layers import vector_dominated_windows

    co = continuum.sea_coefficients(gen)
    if segments is None:
        segments = vector_dominated_windows(scheme, gen, r, s0)
        if not segments:
            raise BoundaryDetectionFailure(
                f"no vector-dominated window found in (0, {s0}) at r={r}"
            )
    field = scheme_gradient_field(scheme, gen)
    raw = integrate_field_moments(field, r, s0, n_max, segments=segments)
    return _moments_from_raw(raw, co.m3, co.m5, gen.c0, gen.c1, r, s0, n_max)


def singular_scaling_fit(values, eps_grid, r_grid, correction=None):
    """Fit |values(eps, r)| ~ eps^a r^b (u1 + u2 log r + u3 log eps).

    ``values`` has shape (len(eps_grid), len(r_grid)).  The affine log
    factor is profiled out by linear least squares at each trial (a, b);
    the powers are found by Nelder-Mead on the profiled residual.
    ``correction``, if given, is a known multiplicative envelope
    correction(eps, r) divided out first (used for documented subleading
    structure).  Returns (a, b, residual_rms).
    """
    from scipy.optimize import minimize

    eps_grid = np.asarray(eps_grid, dtype=float)
    r_grid = np.asarray(r_grid, dtype=float)
    vals = np.abs(np.asarray(values, dtype=float))
    if correction is not None:
        corr = np.array([[correction(e, r) for r in r_grid] for e in eps_grid])
        vals = vals / np.abs(corr)
    le = np.log(eps_grid)[:, None] * np.ones((1, len(r_grid)))
    lr = np.ones((len(eps_grid), 1)) * np.log(r_grid)[None, :]
    lv = np.log(vals)

    cols = np.column_stack(
        [np.ones(lv.size), lr.ravel(), le.ravel()]
    )

    def profiled(ab):
        a, b = ab
        resid = lv.ravel() - a * le.ravel() - b * lr.ravel()
        # log(u1 + u2 log r + u3 log eps) ~ affine in (log r, log eps) over
        # a narrow window; profile it linearly
        coef, *_ = np.linalg.lstsq(cols, resid, rcond=None)
        return float(np.sum((resid - cols @ coef) ** 2))

    # seed from plain bilinear fit
    seed_cols = np.column_stack([np.ones(lv.size), le.ravel(), lr.ravel()])
    seed, *_ = np.linalg.lstsq(seed_cols, lv.ravel(), rcond=None)
    res = minimize(profiled, x0=[seed[1], seed[2]], method="Nelder-Mead",
                   options={"xatol": 1e-5, "fatol": 1e-12, "maxiter": 400})
    a, b = res.x
    return float(a), float(b), math.sqrt(profiled(res.x) / lv.size)


# ---------------------------------------------------------------------------
# origin mollifier
# ---------------------------------------------------------------------------

def bump(x):
    """Smooth compactly supported bump, = 1 near 0, supported in |x| < 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inner = np.abs(x) < 0.35
    mid = (~inner) & (np.abs(x) < 1.0)
    out[inner] = 1.0
    if np.any(mid):
        u = (np.abs(x[mid]) - 0.35) / 0.65
        out[mid] = 1.0 - continuum._ramp(u, 0)
    return out


def mollified_origin_moment(field, delta, test=None, t_max=4.0, r_max=4.0, n_grid=160):
    """4-vector of int eta_delta(xi) M(xi) h(xi) d^4 xi over a polar grid.

    ``field(s, r) -> (M0, Mr, Mb)``; eta_delta(xi) = eta(xi/delta) with eta
    the standard bump; ``test`` is the fixed smooth test function h (bump of
    width t_max by default).  Angular integration is trivial for the
    spherically symmetric components: the gamma^r part integrates to zero,
    so the returned vector has only the time component filled.
    """
    if test is None:
        def test(t, r):
            return bump(np.sqrt(t**2 + r**2) / max(t_max, r_max))

    ts = np.linspace(-t_max, t_max, 2 * n_grid + 1)
    rs = np.linspace(r_max / n_grid * 0.5, r_max, n_grid)
    tt, rr = np.meshgrid(ts, rs, indexing="ij")
    xi = np.sqrt(tt**2 + rr**2)
    eta = bump(xi / delta)
    m0 = np.zeros_like(tt)
    for j, r in enumerate(rs):
        v0, _, _ = field(ts - r, float(r))
        m0[:, j] = v0
    integrand = eta * m0 * test(tt, rr) * rr**2 * 4 * math.pi
    dt = ts[1] - ts[0]
    dr = rs[1] - rs[0]
    val0 = float(np.sum(integrand) * dt * dr)
    return np.array([val0, 0.0, 0.0, 0.0])
