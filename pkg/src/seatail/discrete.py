"""Finite-dimensional model of the variational principle in discrete space-time.

An indefinite inner product space H = C^(2 n m) carries one projector E_x
per point, each image of signature (n, n); a fermionic projector P is a
rank-f projector with negative definite image.  The action sums the
spectral Lagrangian of the closed chains A_xy = E_x P E_y P E_x.

Matrix conventions: the inner product is <u|v> = u^dag S v with S the
diagonal metric; operator adjoint X* = S^-1 X^dag S.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, DomainError

__all__ = [
    "DiscreteSpacetime",
    "FermionicOperator",
    "build_discrete_spacetime",
    "random_fermionic_projector",
    "discrete_action",
    "discrete_gradient_Q",
    "el_residual",
    "chain_block",
]


@dataclass(frozen=True)
class DiscreteSpacetime:
    m_points: int
    n: int
    metric: np.ndarray  # diagonal of S, blockwise (+1^n, -1^n) per point

    @property
    def dim(self):
        return 2 * self.n * self.m_points

    def block(self, x):
        lo = 2 * self.n * x
        return slice(lo, lo + 2 * self.n)

    def projector(self, x):
        e = np.zeros((self.dim, self.dim))
        b = self.block(x)
        e[b, b] = np.eye(2 * self.n)
        return e


@dataclass(frozen=True)
class FermionicOperator:
    matrix: np.ndarray
    f: int
    spacetime: DiscreteSpacetime


def build_discrete_spacetime(m_points, n, seed=0):
    """Canonical block construction: per point, signature (n, n)."""
    if m_points < 1 or n < 1:
        raise DomainError("need m_points >= 1 and n >= 1")
    sig = np.concatenate([np.ones(n), -np.ones(n)])
    metric = np.tile(sig, m_points)
    return DiscreteSpacetime(m_points, n, metric)


def _indefinite_dot(metric, u, v):
    return np.vdot(u, metric * v)


def random_fermionic_projector(st: DiscreteSpacetime, f, seed=0, max_restarts=200):
    """P = -sum_i |u_i><u_i| with <u_i|u_j> = -delta_ij.

    The u_i are drawn with a strong bias toward the metric's negative
    directions and orthonormalized by indefinite Gram-Schmidt; vectors
    whose norm degenerates are redrawn.
    """
    if not (0 <= f <= st.n * st.m_points):
        raise DomainError("f must lie in [0, n*m_points]")
    rng = np.random.default_rng(seed)
    dim = st.dim
    neg = st.metric < 0
    basis = []
    restarts = 0
    while len(basis) < f:
        x = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        x = np.where(neg, x, 0.25 * x)
        for u in basis:
            x = x + u * _indefinite_dot(st.metric, u, x)  # <u|u> = -1
        nrm2 = _indefinite_dot(st.metric, x, x).real
        if nrm2 > -1e-8 * np.vdot(x, x).real:
            restarts += 1
            if restarts > max_restarts:
                raise DegenerateSpectrum("Gram orthonormalization degenerated; re-seed")
            continue
        basis.append(x / math.sqrt(-nrm2))
    P = np.zeros((dim, dim), dtype=complex)
    for u in basis:
        P -= np.outer(u, u.conj() * st.metric)
    return FermionicOperator(P, f, st)


def chain_block(P, st: DiscreteSpacetime, x, y):
    """A_xy = P(x,y) P(y,x) as a 2n x 2n block."""
    bx, by = st.block(x), st.block(y)
    return P[bx, by] @ P[by, bx]


def _lagrangian_from_roots(lam, n):
    a = np.abs(lam)
    return float(np.sum(a**2) - np.sum(a) ** 2 / (2 * n))


def discrete_action(P, st: DiscreteSpacetime):
    """S[P] = sum_xy (1/4n) sum_ij (|lambda_i| - |lambda_j|)^2."""
    if isinstance(P, FermionicOperator):
        P = P.matrix
    total = 0.0
    for x in range(st.m_points):
        for y in range(st.m_points):
            lam = np.linalg.eigvals(chain_block(P, st, x, y))
            total += _lagrangian_from_roots(lam, st.n)
    return total


def _check_nondegenerate(lam, tol=1e-6):
    a = np.sort(np.abs(lam))
    scale = a[-1] + 1e-300
    if a[0] < 3e-5 * scale:
        # |.| has a conical kink at 0; tiny |lambda| under large entries is
        # also hopeless for finite differences (eigenvalue conditioning)
        raise DegenerateSpectrum("|lambda| dynamic range too large for a reliable gradient")
    gaps = np.diff(a)
    if np.any(gaps < tol * scale):
        # equal |lambda| is fine only if the roots themselves coincide
        for i in range(len(lam)):
            for j in range(i + 1, len(lam)):
                if abs(abs(lam[i]) - abs(lam[j])) < tol * scale:
                    if abs(lam[i] - lam[j]) > tol * scale and abs(
                        lam[i] - np.conj(lam[j])
                    ) > tol * scale:
                        raise DegenerateSpectrum(
                            "|lambda_i| = |lambda_j| crossing with distinct roots"
                        )


def gradient_M_block(A, n, h_fd=1e-5):
    """Numerical gradient M[A] of the spectral Lagrangian, dL = Re Tr(M dA).

    L is a function of the |lambda_i|, so it is only real-differentiable
    in the entries (a generic complex perturbation splits a conjugate pair
    and |.| is not holomorphic there): both real and imaginary central
    differences are taken, with Richardson extrapolation.  Along the
    admissible (projector-flow) variations the pseudo-Hermitian structure
    of the chains keeps Tr(M dA) effectively real.  Degenerate |lambda|
    configurations are flagged, not subgradient-approximated.
    """
    lam = np.linalg.eigvals(A)
    _check_nondegenerate(lam)
    d = A.shape[0]
    M = np.zeros_like(A, dtype=complex)

    def L(mat):
        return _lagrangian_from_roots(np.linalg.eigvals(mat), n)

    def central(e, h):
        return (L(A + h * e) - L(A - h * e)) / (2 * h)

    for a in range(d):
        for b in range(d):
            e = np.zeros_like(A)
            e[b, a] = 1.0
            re = [central(e, h) for h in (h_fd, h_fd / 2)]
            im = [central(1j * e, h) for h in (h_fd, h_fd / 2)]
            d_re = (4 * re[1] - re[0]) / 3
            d_im = (4 * im[1] - im[0]) / 3
            M[a, b] = d_re - 1j * d_im
    return M


def discrete_gradient_Q(P, st: DiscreteSpacetime, h_fd=1e-5):
    """Q(x,y) = (1/2) M[A_xy] P(x,y), assembled into the full operator."""
    if isinstance(P, FermionicOperator):
        P = P.matrix
    dim = st.dim
    Q = np.zeros((dim, dim), dtype=complex)
    for x in range(st.m_points):
        bx = st.block(x)
        for y in range(st.m_points):
            by = st.block(y)
            A = chain_block(P, st, x, y)
            if np.max(np.abs(A)) < 1e-300:
                continue
            M = gradient_M_block(A, st.n, h_fd)
            Q[bx, by] = 0.5 * M @ P[bx, by]
    return Q


def el_residual(P, st: DiscreteSpacetime, h_fd=1e-5):
    """Frobenius norm of the Euler-Lagrange commutator [P, Q]."""
    if isinstance(P, FermionicOperator):
        P = P.matrix
    Q = discrete_gradient_Q(P, st, h_fd)
    return float(np.linalg.norm(P @ Q - Q @ P))
