"""Closed chain algebra: components, spectrum, Lagrangian, gradient, Q-kernel.

The closed chain A = P(x,y) P(y,x) of two vector-scalar kernels lives in
the 1+1 Clifford algebra spanned by {1, gamma^0, gamma^r, i gamma^0 gamma^r}
with (gamma^0)^2 = 1, (gamma^r)^2 = -1, anticommuting.  All reductions here
are checked against an explicit 4x4 Dirac-matrix oracle in the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .kernels import SpinorKernel

__all__ = [
    "ClosedChain",
    "ChainSpectrum",
    "VECTOR_DOMINATED",
    "BILINEAR_DOMINATED",
    "DEGENERATE",
    "close_chain",
    "chain_components",
    "discriminant",
    "spectrum",
    "lemma11_spectrum",
    "lagrangian",
    "gradient_M",
    "q_kernel",
    "classify",
]

VECTOR_DOMINATED = "vector_dominated"
BILINEAR_DOMINATED = "bilinear_dominated"
DEGENERATE = "degenerate"

#: relative half-width of the degenerate band around discriminant = 0
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class ClosedChain:
    """A = As*1 + A0*gamma^0 - Ar*gamma^r + Ab*i gamma^0 gamma^r, all real."""

    As: float
    A0: float
    Ar: float
    Ab: float

    def norm(self):
        return float(np.sqrt(self.As**2 + self.A0**2 + self.Ar**2 + self.Ab**2))


@dataclass(frozen=True)
class ChainSpectrum:
    lambda_plus: complex
    lambda_minus: complex
    discriminant: float
    regime: str


def chain_components(ps, p0, pr, qs=None, q0=None, qr=None):
    """Vectorized chain components; (qs,q0,qr) default to the adjoint partner.

    Returns the complex-valued components (real up to roundoff when the
    second factor is the hermiticity partner of the first).
    """
    if qs is None:
        qs, q0, qr = np.conjugate(ps), np.conjugate(p0), np.conjugate(pr)
    a_s = ps * qs + p0 * q0 - pr * qr
    a_0 = ps * q0 + p0 * qs
    a_r = ps * qr + pr * qs
    a_b = 1j * (p0 * qr - pr * q0)
    return a_s, a_0, a_r, a_b


def close_chain(pxy: SpinorKernel, pyx: SpinorKernel | None = None) -> ClosedChain:
    """Close the chain A = P(x,y) P(y,x).

    ``pyx`` defaults to the hermiticity partner of ``pxy``; when supplied it
    must produce real components (checked).
    """
    if pyx is None:
        pyx = pxy.adjoint_partner()
    a_s, a_0, a_r, a_b = chain_components(
        pxy.scalar, pxy.time, pxy.radial, pyx.scalar, pyx.time, pyx.radial
    )
    comps = np.array([a_s, a_0, a_r, a_b])
    scale = np.max(np.abs(comps)) + 1.0
    if np.max(np.abs(comps.imag)) > 1e-9 * scale:
        raise DomainError("closed chain has non-real components; pyx is not a PCT partner")
    return ClosedChain(float(a_s.real), float(a_0.real), float(a_r.real), float(a_b.real))


def discriminant(chain: ClosedChain) -> float:
    return chain.A0**2 - chain.Ar**2 - chain.Ab**2


def _tol(chain: ClosedChain) -> float:
    # the discriminant is quadratic in A, so the degenerate band scales
    # with |A|^2 (a relative band keeps the regime switch deterministic
    # at any chain amplitude)
    return DEGENERACY_TOL * chain.norm() ** 2 + 1e-280


def spectrum(chain: ClosedChain) -> ChainSpectrum:
    """Roots lambda_pm = As +/- sqrt(A0^2 - Ar^2 - Ab^2), each twice."""
    disc = discriminant(chain)
    tol = _tol(chain)
    if disc >= 0:
        root = np.sqrt(disc)
        lp, lm = chain.As + root, chain.As - root
    else:
        root = 1j * np.sqrt(-disc)
        lp, lm = chain.As + root, chain.As - root
    if disc > tol:
        regime = VECTOR_DOMINATED
    elif disc < -tol:
        regime = BILINEAR_DOMINATED
    else:
        regime = DEGENERATE
    return ChainSpectrum(complex(lp), complex(lm), float(disc), regime)


def lemma11_spectrum(g, h):
    """Roots from the vector-scalar structure: g a complex (time, radial)
    pair contracted with the (+,-) Minkowski metric, h the complex scalar."""
    g0, gr = g
    gg = g0 * np.conjugate(g0) - gr * np.conjugate(gr)  # real
    g2 = g0 * g0 - gr * gr
    g2bar = np.conjugate(g2)
    hh = h * np.conjugate(h)
    # (g hbar + h gbar)^2 = g^2 hbar^2 + 2 (g gbar)(h hbar) + gbar^2 h^2
    cross = g2 * np.conjugate(h) ** 2 + 2 * gg * hh + g2bar * h**2
    disc = gg * gg - g2 * g2bar + cross
    base = gg + hh
    root = np.sqrt(complex(disc))
    return complex(base + root), complex(base - root)


def lagrangian(chain: ClosedChain) -> float:
    """(lambda_+ - lambda_-)^2 for a real spectrum, 0 for a complex pair."""
    disc = discriminant(chain)
    if disc > _tol(chain):
        return 4.0 * disc
    return 0.0


def gradient_M(chain: ClosedChain) -> ClosedChain:
    """Gradient of the Lagrangian: twice the trace-free part of A on the
    real-spectrum side, zero on the complex-pair side (and on the degenerate
    band, where the Lagrangian is C^1 with vanishing gradient)."""
    disc = discriminant(chain)
    if disc > _tol(chain):
        return ClosedChain(0.0, 2.0 * chain.A0, 2.0 * chain.Ar, 2.0 * chain.Ab)
    return ClosedChain(0.0, 0.0, 0.0, 0.0)


def gradient_components(a0, a1, ar, ab):
    """Vectorized gradient components from raw chain components.

    Input a0 is ignored (scalar part drops out); returned are (M0, Mr, Mb)
    masked to zero outside the vector-dominated regime.
    """
    disc = a1**2 - ar**2 - ab**2
    norm2 = a0**2 + a1**2 + ar**2 + ab**2
    tol = DEGENERACY_TOL * norm2 + 1e-280
    mask = disc > tol
    return (
        np.where(mask, 2.0 * a1, 0.0),
        np.where(mask, 2.0 * ar, 0.0),
        np.where(mask, 2.0 * ab, 0.0),
        disc,
    )


def q_kernel(M: ClosedChain, pxy: SpinorKernel):
    """Q(x,y) = (1/2) M[A] P(x,y) reduced to (Qs, Q0, Qr); no bilinear part.

    ``M`` must be a gradient output (vanishing scalar component).
    """
    if abs(M.As) > 1e-12 * (1.0 + M.norm()):
        raise DomainError("q_kernel expects a gradient chain with vanishing scalar part")
    a0, ar, ab = 0.5 * M.A0, 0.5 * M.Ar, 0.5 * M.Ab
    qs = a0 * pxy.time - ar * pxy.radial
    q0 = a0 * pxy.scalar + 1j * ab * pxy.radial
    qr = ar * pxy.scalar + 1j * ab * pxy.time
    return qs, q0, qr


def classify(scheme, gen, t, r) -> ChainSpectrum:
    """Evaluate the regularized projector at (t, r), close the chain, and
    return spectrum plus dominance regime."""
    from . import projector  # deferred: projector builds on this module

    pxy = projector.eval_projector_fast(scheme, gen, t, r)
    return spectrum(close_chain(pxy))
