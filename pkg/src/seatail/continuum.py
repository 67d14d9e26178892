"""Unregularized Dirac-sea objects.

Everything here lives in natural units with dimensionless lengths and
masses of order one.  The light-cone variable is z = xi^2 = t^2 - r^2;
for a point at radius r and light-cone distance s = t - r from the future
cone, z = s (s + 2r).

Conventions fixed here and relied on everywhere else:

  * kernel vector part carries d/dx = -d/dxi, so the unregularized kernel
    is  P = sum_b rho_b [ m_b (a_b + i b_b)  -  2 i (a_b' + i b_b') xi-slash ];
  * eps(0) = -1 for the time step function;
  * f = -8 sum_{a,b} rho_a rho_b (a_a' m_b b_b - m_a a_a b_b'), which makes
    the 1/z^2 coefficient m3 strictly negative.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from . import specfun
from .errors import DomainError, LightConeSingularity

__all__ = [
    "GenerationSpec",
    "SeaCoefficients",
    "sea_coefficients",
    "sea_ab",
    "sea_ab_spacelike",
    "f_of_z",
    "f_series",
    "g_of_z",
    "g_bundle",
    "mtilde_components",
    "closed_form_moments",
    "series_constants",
    "expansion_offset",
]

_PI = math.pi


@dataclass(frozen=True)
class GenerationSpec:
    """Masses and weights of the Dirac seas plus the two integration constants."""

    masses: tuple
    weights: tuple
    c0: float = 0.0
    c1: float = 0.0

    def __post_init__(self):
        if len(self.masses) < 1 or len(self.masses) != len(self.weights):
            raise DomainError("need at least one (mass, weight) pair, same lengths")
        if any(m <= 0 for m in self.masses) or any(w <= 0 for w in self.weights):
            raise DomainError("masses and weights must be positive")
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @classmethod
    def three_seas(cls, masses=(1.0, 2.0, 3.0), weights=(1.0, 1.0, 1.0), c0=0.0, c1=0.0):
        return cls(tuple(masses), tuple(weights), c0, c1)

    def z_cross(self):
        """Default series/quadrature crossover 1e-3 * min_b m_b^-2."""
        return 1e-3 / max(self.masses) ** 2


@dataclass(frozen=True)
class SeaCoefficients:
    m3: float
    m5: float


def sea_coefficients(gen: GenerationSpec) -> SeaCoefficients:
    """Pole coefficients of f: f = m3/z^2 + m5/z + O(log z)."""
    m = np.asarray(gen.masses)
    w = np.asarray(gen.weights)
    m3 = -np.sum(w[:, None] * w[None, :] * (m[:, None] ** 3 + m[None, :] ** 3)) / (
        64 * _PI**5
    )
    diff = m[:, None] - m[None, :]
    summ = m[:, None] + m[None, :]
    m5 = np.sum(w[:, None] * w[None, :] * diff**2 * summ**3) / (512 * _PI**5)
    return SeaCoefficients(float(m3), float(m5))


def sea_ab(z, m):
    """Bessel pair (a, b) of one sea and their z-derivatives, for z > 0.

    a = (m^2/16 pi^2) Y1(m sqrt z)/(m sqrt z), b likewise with J1; the
    derivatives use d/du (C1(u)/u) = -C2(u)/u.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("sea_ab requires timelike z > 0")
    u = m * np.sqrt(z)
    j1, y1 = specfun.bessel_j1(u), specfun.bessel_y1(u)
    j0, y0 = specfun.bessel_j0(u), specfun.bessel_y0(u)
    j2 = 2 * j1 / u - j0
    y2 = 2 * y1 / u - y0
    c = m**2 / (16 * _PI**2)
    a = c * y1 / u
    b = c * j1 / u
    da = -(m**4 / (32 * _PI**2)) * y2 / u**2
    db = -(m**4 / (32 * _PI**2)) * j2 / u**2
    return a, b, da, db


def sea_ab_spacelike(z, m):
    """Real continuation for z < 0: b vanishes, a decays with K1."""
    z = np.asarray(z, dtype=float)
    if np.any(z >= 0):
        raise DomainError("sea_ab_spacelike requires z < 0")
    v = m * np.sqrt(-z)
    k1 = specfun.bessel_k1(v)
    import scipy.special as _sp

    k2 = _sp.kn(2, v)
    a = (m**2 / (8 * _PI**3)) * k1 / v
    da = (m**4 / (16 * _PI**3)) * k2 / v**2
    return a, da


def f_of_z(z, gen: GenerationSpec):
    """The Lorentz-invariant gradient profile f(z) for z > 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("f_of_z requires z > 0")
    m = np.asarray(gen.masses)
    w = np.asarray(gen.weights)
    s_da = np.zeros_like(z)
    s_mb = np.zeros_like(z)
    s_ma = np.zeros_like(z)
    s_db = np.zeros_like(z)
    for mb, wb in zip(m, w):
        a, b, da, db = sea_ab(z, mb)
        s_da += wb * da
        s_mb += wb * mb * b
        s_ma += wb * mb * a
        s_db += wb * db
    out = -8.0 * (s_da * s_mb - s_ma * s_db)
    return out if out.shape else out.item()


def f_series(z, coeffs: SeaCoefficients):
    """Two-term pole expansion of f."""
    z = np.asarray(z, dtype=float)
    return coeffs.m3 / z**2 + coeffs.m5 / z


def series_constants(gen: GenerationSpec):
    """Constant and linear coefficients of the small-z expansion of g,

        g = -(m3/8) log z + (m5/16) z log z + k0 + k1 z + O(z^2 log z).

    The additive constant is re-based by -3 m5/32 relative to the raw
    nested integrals: g is only determined modulo contributions supported
    on the light cone, and this base point is the one for which the
    closed-form moments hold with the bare integration constants
    (the raw base point would shift J^0 by -3 m5/(16 r)).
    """
    co = sea_coefficients(gen)
    k0 = (4 * gen.c0 - 2 * co.m3) / 32.0
    k1 = (2 * gen.c1 + 2 * co.m3 - 3 * co.m5) / 32.0
    return k0, k1


# ---------------------------------------------------------------------------
# nested-integral machinery for g
# ---------------------------------------------------------------------------

_GAUSS16 = np.polynomial.legendre.leggauss(16)


def _cumulative_gauss(fn, edges):
    """Cumulative integral of fn over consecutive [edges[i], edges[i+1]]."""
    x, w = _GAUSS16
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = fn(pts.ravel()).reshape(pts.shape)
    pieces = half * np.sum(vals * w[None, :], axis=1)
    return np.concatenate([[0.0], np.cumulative_sum(pieces)])


class _GTables:
    """Tabulated smooth parts of the nested integrals defining g.

    With F1(z) = int_1^z f, G2(z) = int_0^z sigma F1(sigma) dsigma and
    g = (1/8) int_1^z G2/tau^2 + c0/8 + c1 z/16, the derivatives follow
    without differentiating any table:

        g'   = G2/(8 z^2) + c1/16
        g''  = (F1/z - 2 G2/z^2 / z) / 8
        g''' = (f/z - 3 F1/z^2 + 6 G2/z^4) / 8

    The pole parts of F1, G2 and g are carried analytically; only the
    smooth remainders T1 = int_1^z (f - poles), Q = int_0^z sigma T1 and
    RI = int_1^z Q/tau^2 are tabulated (cubic splines in log z).
    """

    Z_LO = 1e-9
    Z_HI = 600.0
    N_EDGES = 1600

    def __init__(self, gen: GenerationSpec):
        from scipy.interpolate import CubicSpline

        self.gen = gen
        self.co = sea_coefficients(gen)
        m3, m5 = self.co.m3, self.co.m5
        zg = np.geomspace(self.Z_LO, self.Z_HI, self.N_EDGES)
        # make sure 1.0 is a grid point so the base-point integrals are exact
        zg = np.unique(np.concatenate([zg, [1.0]]))
        i1 = int(np.searchsorted(zg, 1.0))

        def f_t(z):
            return f_of_z(z, gen) - m3 / z**2 - m5 / z

        cum = _cumulative_gauss(f_t, zg)
        t1 = cum - cum[i1]
        self._t1 = CubicSpline(np.log(zg), t1)

        def sig_t1(z):
            return z * self._t1(np.log(z))

        cumq = _cumulative_gauss(sig_t1, zg)
        # below Z_LO: T1 ~ const, contribution ~ T1(Z_LO) z^2/2
        q0 = t1[0] * zg[0] ** 2 / 2.0
        q = cumq + q0
        self._q = CubicSpline(np.log(zg), q)

        def q_over_tau2(z):
            return self._q(np.log(z)) / z**2

        cumr = _cumulative_gauss(q_over_tau2, zg)
        ri = cumr - cumr[i1]
        self._ri = CubicSpline(np.log(zg), ri)

    def _clip(self, z):
        return np.clip(z, self.Z_LO, self.Z_HI)

    def t1(self, z):
        return self._t1(np.log(self._clip(z)))

    def q(self, z):
        return self._q(np.log(self._clip(z)))

    def ri(self, z):
        return self._ri(np.log(self._clip(z)))

    def f1(self, z):
        m3, m5 = self.co.m3, self.co.m5
        return m3 * (1.0 - 1.0 / z) + m5 * np.log(z) + self.t1(z)

    def g2(self, z):
        m3, m5 = self.co.m3, self.co.m5
        return m3 * z**2 / 2 - m3 * z + m5 * (z**2 * np.log(z) / 2 - z**2 / 4) + self.q(z)

    def g_exact(self, z, derivative=0):
        """g from (gdef) and its first three z-derivatives, z > 0."""
        gen = self.gen
        m3, m5 = self.co.m3, self.co.m5
        z = np.asarray(z, dtype=float)
        if derivative == 0:
            closed = (
                (m3 / 2 - m5 / 4) * (z - 1.0)
                - m3 * np.log(z)
                + (m5 / 2) * (z * np.log(z) - z + 1.0)
            ) / 8.0
            return closed + self.ri(z) / 8.0 + gen.c0 / 8.0 + gen.c1 * z / 16.0
        if derivative == 1:
            return self.g2(z) / (8.0 * z**2) + gen.c1 / 16.0
        if derivative == 2:
            return (self.f1(z) / z - 2.0 * self.g2(z) / z**3) / 8.0
        if derivative == 3:
            return (f_of_z(z, gen) / z - 3.0 * self.f1(z) / z**2 + 6.0 * self.g2(z) / z**4) / 8.0
        raise DomainError("derivative order must be 0..3")


@lru_cache(maxsize=8)
def _gtables(gen: GenerationSpec) -> _GTables:
    return _GTables(gen)


def _series_g(z, gen, derivative=0):
    co = sea_coefficients(gen)
    m3, m5 = co.m3, co.m5
    k0, k1 = series_constants(gen)
    z = np.asarray(z, dtype=float)
    if derivative == 0:
        return -(m3 / 8) * np.log(z) + (m5 / 16) * z * np.log(z) + k0 + k1 * z
    if derivative == 1:
        return -(m3 / 8) / z + (m5 / 16) * (np.log(z) + 1.0) + k1
    if derivative == 2:
        return (m3 / 8) / z**2 + (m5 / 16) / z
    if derivative == 3:
        return -(m3 / 4) / z**3 - (m5 / 16) / z**2
    raise DomainError("derivative order must be 0..3")


def _ramp(x, derivative=0):
    """C^3 septic smoothstep on [0, 1] and its derivatives."""
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, 0.0, 1.0)
    if derivative == 0:
        v = xc**4 * (35 - 84 * xc + 70 * xc**2 - 20 * xc**3)
        return np.where(x >= 1, 1.0, np.where(x <= 0, 0.0, v))
    if derivative == 1:
        v = 140 * xc**3 * (1 - xc) ** 3
        return np.where((x >= 1) | (x <= 0), 0.0, v)
    if derivative == 2:
        v = 420 * xc**2 * (1 - xc) ** 2 * (1 - 2 * xc)
        return np.where((x >= 1) | (x <= 0), 0.0, v)
    if derivative == 3:
        v = 840 * xc * (1 - xc) * (1 - 5 * xc + 5 * xc**2)
        return np.where((x >= 1) | (x <= 0), 0.0, v)
    raise DomainError("derivative order must be 0..3")


def g_bundle(z, gen: GenerationSpec, blend=None):
    """(g, g', g'', g''') for z > 0.

    With ``blend`` a crossover scale (default gen.z_cross()), g follows the
    small-z series expansion below blend/2 and the exact nested integrals
    above blend, joined C^3 by a smooth ramp on the remainder.  The moments
    depend only on the series behaviour, which is exactly what this pins
    down.  ``blend=False`` evaluates the exact integrals everywhere.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("g is defined for z > 0")
    tab = _gtables(gen)
    if blend is False:
        return tuple(tab.g_exact(z, k) for k in range(4))
    if blend is None:
        blend = gen.z_cross()
    lo = blend / 2.0
    width = blend - lo
    x = (z - lo) / width
    out = []
    ser = [_series_g(z, gen, k) for k in range(4)]
    # remainder R = g_exact - series, ramped in with W; Leibniz for (W R)^(k)
    need = z >= lo
    R = [np.where(need, tab.g_exact(np.maximum(z, lo), k) - ser[k], 0.0) for k in range(4)]
    W = [_ramp(x, k) / width**k for k in range(4)]
    out.append(ser[0] + W[0] * R[0])
    out.append(ser[1] + W[1] * R[0] + W[0] * R[1])
    out.append(ser[2] + W[2] * R[0] + 2 * W[1] * R[1] + W[0] * R[2])
    out.append(ser[3] + W[3] * R[0] + 3 * W[2] * R[1] + 3 * W[1] * R[2] + W[0] * R[3])
    return tuple(out)


def g_of_z(z, gen: GenerationSpec, blend=None):
    """The potential g(z) of (the double derivative of) the causal field."""
    return g_bundle(z, gen, blend=blend)[0]


def expansion_offset(gen: GenerationSpec):
    """Measured (k0, k1) offsets of the exact g against the printed series.

    Returns (dk0, dk1) such that g_exact(z) ~ series(z) + dk0 + dk1 z as
    z -> 0.  Nonzero offsets reflect the freedom of g modulo light-cone
    contributions; the blended g used by default removes them.
    """
    zs = np.geomspace(1e-7, 1e-5, 12)
    tab = _gtables(gen)
    diff = tab.g_exact(zs, 0) - _series_g(zs, gen, 0)
    coef = np.polyfit(zs, diff, 1)
    return float(coef[1]), float(coef[0])


def _epsilon_t(t):
    # paper convention: eps(x) = 1 for x > 0 and -1 otherwise
    return np.where(t > 0, 1.0, -1.0)


def mtilde_components(s, r, gen: GenerationSpec):
    """Time and radial components of the causal gradient field at (s, r).

    s = t - r is the light-cone coordinate; returns (0, 0) at spacelike
    separation and raises within |z| < 1e-12 (1 + r^2) of the cone.
    """
    if r <= 0:
        raise DomainError("mtilde_components requires r > 0")
    s = np.asarray(s, dtype=float)
    t = s + r
    z = s * (s + 2.0 * r)
    tol = 1e-12 * (1.0 + r**2)
    if np.any(np.abs(z) < tol):
        raise LightConeSingularity(f"|z| < {tol:g} at the light cone")
    m0 = np.zeros_like(s)
    mr = np.zeros_like(s)
    timelike = z > 0
    if np.any(timelike):
        fz = f_of_z(z[timelike], gen)
        sign = _epsilon_t(t[timelike])
        m0[timelike] = sign * t[timelike] * fz
        mr[timelike] = sign * r * fz
    if m0.shape:
        return m0, mr
    return m0.item(), mr.item()


def closed_form_moments(r, gen: GenerationSpec):
    """Lemma closed forms of the counterterm-corrected moments at radius r."""
    from .moments import MomentSet  # deferred: moments builds on this module

    if r <= 0:
        raise DomainError("closed_form_moments requires r > 0")
    co = sea_coefficients(gen)
    m3, m5 = co.m3, co.m5
    i0 = m3 / (8 * r**2) + (m5 / 2) * math.log(2 * r) + (m3 + gen.c1) / 2
    j0 = (m3 / 4) * math.log(2 * r) / r + (m3 - 2 * gen.c0) / (8 * r)
    return MomentSet(
        I0=i0,
        Ir=i0 - j0 / r,
        Ib=0.0,
        J0=j0,
        Jr=j0,
        Jb=0.0,
        K={n: 0.0 for n in (2, 3)},
        m3=m3,
        m5=m5,
        c0=gen.c0,
        c1=gen.c1,
        s0=0.0,
    )
