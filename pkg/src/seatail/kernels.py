"""Spinor kernel values reduced to scalar/time/radial components.

A kernel value is P = scalar*1 + time*gamma^0 - radial*gamma^r in the polar
basis attached to xi = y - x.  Hermiticity P(x,y)* = P(y,x) reads in these
components: the adjoint partner (the kernel from y to x, expressed in the
same gamma^r basis) has all three components conjugated, while the PCT map
(t -> -t at fixed r, i.e. the same kernel on the past cone) conjugates and
flips the radial sign.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["SpinorKernel"]


@dataclass(frozen=True)
class SpinorKernel:
    scalar: complex
    time: complex
    radial: complex

    def adjoint_partner(self):
        """P(y,x) in the same polar basis: componentwise conjugate."""
        return SpinorKernel(
            np.conjugate(self.scalar), np.conjugate(self.time), np.conjugate(self.radial)
        )

    def pct(self):
        """Components of the kernel at (-t, r): conjugate, radial sign flip."""
        return SpinorKernel(
            np.conjugate(self.scalar), np.conjugate(self.time), -np.conjugate(self.radial)
        )

    def __add__(self, other):
        return SpinorKernel(
            self.scalar + other.scalar, self.time + other.time, self.radial + other.radial
        )

    def __sub__(self, other):
        return SpinorKernel(
            self.scalar - other.scalar, self.time - other.time, self.radial - other.radial
        )

    def __mul__(self, c):
        return SpinorKernel(c * self.scalar, c * self.time, c * self.radial)

    __rmul__ = __mul__

    def norm(self):
        return float(
            np.sqrt(abs(self.scalar) ** 2 + abs(self.time) ** 2 + abs(self.radial) ** 2)
        )
