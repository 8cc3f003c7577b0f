"""Periodic spatial operators as circulants with analytic spectra.

Covers the two model problems: second-order central diffusion and
third-order upwind-biased advection on the periodic unit interval with N
equispaced points x_j = j/N.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RangeError
from .linalg import Spectrum, sort_eigenvalues


@dataclass(frozen=True)
class CirculantOperator:
    """scale * circulant built from a periodic stencil {offset: coefficient}.

    The materialized matrix has entry (i, j) = scale * stencil[(j - i) mod n].
    """

    n: int
    stencil: dict = field(default_factory=dict)
    scale: float = 1.0

    def materialize(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for off, coeff in self.stencil.items():
            idx = (np.arange(self.n) + off) % self.n
            a[np.arange(self.n), idx] += coeff
        return self.scale * a

    def symbol(self, k) -> np.ndarray:
        """Eigenvalue(s) lambda_k = scale * sum_j c_j exp(i 2 pi k j / n)."""
        k = np.asarray(k)
        lam = np.zeros(k.shape, dtype=complex)
        for off, coeff in self.stencil.items():
            lam += coeff * np.exp(2j * np.pi * k * off / self.n)
        return self.scale * lam


def circulant_spectrum(op: CirculantOperator) -> Spectrum:
    """Analytic spectrum, in index order k = 0..n-1."""
    return Spectrum(sort_eigenvalues(op.symbol(np.arange(op.n))), op.n)


def circulant_eigenvalues(op: CirculantOperator) -> np.ndarray:
    """Analytic eigenvalues in harmonic index order (unsorted)."""
    return op.symbol(np.arange(op.n))


@dataclass(frozen=True)
class ModelProblem:
    """A semi-discretized PDE: U_t = A U with a circulant A."""

    kind: str  # "diffusion" or "advection"
    n: int
    coefficient: float  # nu or c
    operator: CirculantOperator

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    def grid(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    def cfl(self, dt: float) -> float:
        if self.kind != "advection":
            raise RangeError("CFL number is reported for advection only")
        return self.coefficient * dt / self.dx


def make_diffusion(n: int, nu: float) -> ModelProblem:
    """Second-order central diffusion, negative semi-definite convention."""
    if n < 4 or n % 2:
        raise RangeError(f"diffusion grid needs even n >= 4, got {n}")
    if nu <= 0:
        raise RangeError(f"diffusion coefficient must be positive, got {nu}")
    dx = 1.0 / n
    op = CirculantOperator(n=n, stencil={-1: 1.0, 0: -2.0, 1: 1.0}, scale=nu / dx**2)
    return ModelProblem(kind="diffusion", n=n, coefficient=nu, operator=op)


def make_advection(n: int, c: float) -> ModelProblem:
    """Third-order upwind-biased advection transporting rightwards at speed c."""
    if n < 6 or n % 2:
        raise RangeError(f"advection grid needs even n >= 6, got {n}")
    if c <= 0:
        raise RangeError(f"advection speed must be positive, got {c}")
    dx = 1.0 / n
    op = CirculantOperator(
        n=n,
        stencil={-2: 1.0, -1: -6.0, 0: 3.0, 1: 2.0},
        scale=-c / (6.0 * dx),
    )
    return ModelProblem(kind="advection", n=n, coefficient=c, operator=op)


def exact_solution(p: ModelProblem, k: int, t: float) -> np.ndarray:
    """PDE solution for initial data sin(2 pi k x), sampled on the grid."""
    if k < 1 or k > p.n - 1:
        raise RangeError(f"wavenumber must lie in 1..{p.n - 1}, got {k}")
    x = p.grid()
    if p.kind == "diffusion":
        return np.exp(-p.coefficient * (2 * np.pi * k) ** 2 * t) * np.sin(2 * np.pi * k * x)
    if p.kind == "advection":
        return np.sin(2 * np.pi * k * (x - p.coefficient * t))
    raise RangeError(f"unknown problem kind {p.kind!r}")


def coarsen(p: ModelProblem) -> ModelProblem:
    """The same model problem on the grid with half the points."""
    maker = make_diffusion if p.kind == "diffusion" else make_advection
    return maker(p.n // 2, p.coefficient)
