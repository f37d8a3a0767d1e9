"""Projection onto an eigenbasis and spectrally defined Sobolev norms.

The norm of order k weighs squared coefficients by lambda_n^k, i.e. it
is the L^2 norm of the k/2-th operator power; k may be any real number,
negative orders appearing in the energy estimates for the initial
velocity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, NonPositiveSpectrum
from .grid import GridFunction
from .prufer import EigenBasis


@dataclass(frozen=True)
class SpectralCoeffs:
    """Coefficients of a function against an :class:`EigenBasis`."""

    basis: EigenBasis
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (len(self.basis),):
            raise GridMismatch(
                f"expected {len(self.basis)} coefficients, got {c.shape}")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def n_max(self) -> int:
        return len(self.basis)


def analyze(f: GridFunction, basis: EigenBasis) -> SpectralCoeffs:
    """c_n = <f, phi_n> by the grid's Simpson rule."""
    if f.grid.n != basis.grid.n:
        raise GridMismatch(
            f"function grid {f.grid.n} != basis grid {basis.grid.n}")
    weighted = basis.grid.simpson_weights * f.values
    return SpectralCoeffs(basis, basis.phi_matrix @ weighted)


def synthesize(c: SpectralCoeffs) -> GridFunction:
    """sum_n c_n phi_n sampled on the basis grid."""
    return GridFunction(c.basis.grid, c.coeffs @ c.basis.phi_matrix)


def sobolev_norm(c: SpectralCoeffs, k: float) -> float:
    """(sum_n lambda_n^k c_n^2)^(1/2) for real k."""
    lam = c.basis.lambdas
    if np.any(lam <= 0.0):
        raise NonPositiveSpectrum(
            f"need positive spectrum for order {k}, min lambda {lam.min():.6g}")
    weights = np.exp(k * np.log(lam)) if k != 0.0 else np.ones_like(lam)
    return float(np.sqrt(np.sum(weights * c.coeffs**2)))


def parseval_defect(f: GridFunction, basis: EigenBasis) -> float:
    """||f||^2 - sum c_n^2; nonnegative up to quadrature error."""
    c = analyze(f, basis)
    return f.inner(f) - float(np.sum(c.coeffs**2))
