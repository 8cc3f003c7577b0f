"""Single-interval and composite collocation problems.

A single interval couples M quadrature nodes with an N-dimensional spatial
operator through I - dt*(Q kron A).  The composite problem chains L such
intervals with a node-propagation block N that copies each interval's final
node value onto every node of the next interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RangeError
from .quadrature import QuadratureRule
from .transfer import node_propagation


@dataclass(frozen=True)
class CollocationProblem:
    """I - dt*(Q kron A) on one subinterval of length dt."""

    a: np.ndarray
    rule: QuadratureRule
    dt: float
    matrix: np.ndarray

    @property
    def n_space(self) -> int:
        return self.a.shape[0]

    @property
    def dim(self) -> int:
        return self.rule.m * self.n_space


def collocation_matrix(a, rule: QuadratureRule, dt: float) -> CollocationProblem:
    a = np.asarray(a)
    if dt <= 0:
        raise RangeError(f"subinterval length must be positive, got {dt}")
    mat = np.eye(rule.m * a.shape[0]) - dt * np.kron(rule.q, a)
    return CollocationProblem(a=a, rule=rule, dt=dt, matrix=mat)


def spread_initial(u0, m: int, l: int = 1) -> np.ndarray:
    """Copy the initial value onto every node of every interval."""
    u0 = np.asarray(u0)
    return np.tile(u0, m * l)


@dataclass(frozen=True)
class CompositeSystem:
    """Block lower-bidiagonal system over L identical subintervals."""

    l: int
    problem: CollocationProblem
    n_matrix: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def dim(self) -> int:
        return self.l * self.problem.dim

    def three_layer_matrix(self) -> np.ndarray:
        """The same matrix assembled as I - dt*(I_L kron Q kron A) - E kron N."""
        p = self.problem
        ll = self.l
        e = np.diag(np.ones(ll - 1), -1) if ll > 1 else np.zeros((1, 1))
        return (
            np.eye(self.dim)
            - p.dt * np.kron(np.eye(ll), np.kron(p.rule.q, p.a))
            - np.kron(e, self.n_matrix)
        )


def composite_system(problem: CollocationProblem, l: int, u0) -> CompositeSystem:
    """Assemble the composite collocation matrix and its right-hand side."""
    if l < 1:
        raise RangeError(f"need at least one subinterval, got {l}")
    u0 = np.asarray(u0)
    n_mat = np.kron(node_propagation(problem.rule.m), np.eye(problem.n_space))
    dim = l * problem.dim
    mat = np.zeros((dim, dim))
    d = problem.dim
    for i in range(l):
        mat[i * d : (i + 1) * d, i * d : (i + 1) * d] = problem.matrix
        if i > 0:
            mat[i * d : (i + 1) * d, (i - 1) * d : i * d] = -n_mat
    rhs = np.zeros(dim, dtype=u0.dtype)
    rhs[:d] = spread_initial(u0, problem.rule.m)
    return CompositeSystem(l=l, problem=problem, n_matrix=n_mat, matrix=mat, rhs=rhs)
