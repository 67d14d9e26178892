"""Special functions used throughout the package.

Bessel J1/Y1, Gamma, digamma and the upper incomplete Gamma G(0, z) on
rays avoiding the negative real axis.  The heavy lifting is delegated to
scipy.special (series for small argument, asymptotic/continued-fraction
forms for large argument, with scipy's documented crossovers); this module
pins down domains, branches and error behaviour, and the test suite checks
the values against independent series/quadrature oracles.

All branch choices use the principal branch of log; this matters for
G(0, i*Omega*x) in the momentum-cone machinery.
"""

from dataclasses import dataclass

import numpy as np
import scipy.special as _sp

from .errors import DomainError

__all__ = [
    "Accuracy",
    "bessel_j0",
    "bessel_j1",
    "bessel_y0",
    "bessel_y1",
    "bessel_k1",
    "gamma",
    "digamma",
    "incomplete_gamma0",
    "EULER_GAMMA",
]

EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class Accuracy:
    """Tolerance bundle for iterative evaluations."""

    abs_tol: float = 1e-14
    rel_tol: float = 1e-12
    max_terms: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")


def bessel_j0(x):
    return _sp.j0(x)


def bessel_j1(x):
    """J1(x); total on the reals."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("bessel_j1 requires finite argument")
    return _sp.j1(x)


def bessel_y0(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("bessel_y0 requires x > 0")
    return _sp.y0(x)


def bessel_y1(x):
    """Y1(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("bessel_y1 requires x > 0")
    return _sp.y1(x)


def bessel_k1(x):
    """Modified Bessel K1(x) for x > 0 (spacelike continuations)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("bessel_k1 requires x > 0")
    return _sp.k1(x)


def gamma(x):
    """Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("gamma requires x > 0")
    return _sp.gamma(x)


def digamma(x):
    """psi(x) = Gamma'(x)/Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("digamma requires x > 0")
    return _sp.psi(x)


def incomplete_gamma0(z):
    """Upper incomplete Gamma G(0, z) = int_z^inf e^-u / u du.

    Defined for complex z != 0 with Re z >= 0 (purely imaginary allowed);
    the integration ray avoids the negative real axis and the principal
    branch is used throughout.  Equals the exponential integral E1(z).
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("incomplete_gamma0 diverges logarithmically at z = 0")
    if np.any(np.real(z) < -1e-300):
        raise DomainError("incomplete_gamma0 requires Re z >= 0")
    return _sp.exp1(z)
