"""Circulant-interweaved (CI) transfer operators between periodic grids.

The fine grid has N points, the coarse grid N/2, aligned so that every even
fine point coincides with a coarse point.  Interpolation interweaves identity
rows (coinciding points) with rows of a circulant midpoint stencil C;
restriction is half the transpose of another CI-interpolation.  Both
transform into two-diagonal matrices under the Fourier bases of the two
grids, with closed-form harmonic diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DimensionError, RangeError, SizeError
from .linalg import dft_matrix
from .space_operators import CirculantOperator


def interweave(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Stack two equally shaped matrices row-alternatingly, a's rows first."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"interweave shape mismatch: {a.shape} vs {b.shape}")
    out = np.empty((2 * a.shape[0], a.shape[1]), dtype=np.result_type(a, b))
    out[0::2] = a
    out[1::2] = b
    return out


def midpoint_stencil_points(degree: int) -> int:
    """Width of the symmetric midpoint-interpolation stencil for a degree."""
    if degree < 1:
        raise RangeError(f"exactness degree must be >= 1, got {degree}")
    if degree <= 2:
        return 2
    return 2 * ((degree + 3) // 2)


def midpoint_generator(n_coarse: int, degree: int) -> CirculantOperator:
    """Circulant whose row j evaluates the fine midpoint right of coarse j.

    Uses Lagrange weights at the half-integer offset; the weights sum to 1,
    so constants are reproduced exactly.
    """
    p = midpoint_stencil_points(degree)
    if p > n_coarse:
        raise SizeError(f"stencil width {p} exceeds coarse grid size {n_coarse}")
    offsets = np.arange(-(p // 2 - 1), p // 2 + 1)
    weights = np.array(
        [
            np.prod([(0.5 - o) / (i - o) for o in offsets if o != i])
            for i in offsets
        ]
    )
    return CirculantOperator(n=n_coarse, stencil=dict(zip(offsets.tolist(), weights)))


@dataclass(frozen=True)
class TransferPair:
    """CI interpolation/restriction pair between grids of size N and N/2."""

    n_fine: int
    generator_interp: CirculantOperator
    generator_restr: CirculantOperator
    interpolation: np.ndarray
    restriction: np.ndarray
    restriction_scale: float = 2.0

    @property
    def n_coarse(self) -> int:
        return self.n_fine // 2


def build_ci_pair(n_fine: int, interp_exactness: int = 6, restr_exactness: int = 2) -> TransferPair:
    """CI pair with the requested polynomial exactness on each leg."""
    if n_fine % 2:
        raise RangeError(f"fine grid size must be even, got {n_fine}")
    nc = n_fine // 2
    gen_i = midpoint_generator(nc, interp_exactness)
    gen_r = midpoint_generator(nc, restr_exactness)
    interpolation = interweave(np.eye(nc), gen_i.materialize())
    restriction = 0.5 * interweave(np.eye(nc), gen_r.materialize()).T
    return TransferPair(
        n_fine=n_fine,
        generator_interp=gen_i,
        generator_restr=gen_r,
        interpolation=interpolation,
        restriction=restriction,
    )


@dataclass(frozen=True)
class HarmonicDiagonals:
    """Closed-form diagonals of the transformed interpolation/restriction.

    d/d_hat belong to the interpolation, f/f_hat to the restriction; index k
    runs over the N/2 coarse harmonics.
    """

    d: np.ndarray
    d_hat: np.ndarray
    f: np.ndarray
    f_hat: np.ndarray


def _diagonal_pair(gen: CirculantOperator, n_fine: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(n_fine // 2)
    lam = gen.symbol(k)
    phase = np.exp(-2j * np.pi * k / n_fine)
    d = (1.0 + lam * phase) / np.sqrt(2.0)
    d_hat = (1.0 - lam * phase) / np.sqrt(2.0)
    return d, d_hat


def harmonic_diagonals(pair: TransferPair, verify: bool = True, tol: float = 1e-12) -> HarmonicDiagonals:
    """Harmonic diagonals; optionally verified against the materialized transform."""
    d, d_hat = _diagonal_pair(pair.generator_interp, pair.n_fine)
    f, f_hat = _diagonal_pair(pair.generator_restr, pair.n_fine)
    diags = HarmonicDiagonals(d=d, d_hat=d_hat, f=f, f_hat=f_hat)
    if verify:
        _verify_structure(pair, diags, tol)
    return diags


def _verify_structure(pair: TransferPair, diags: HarmonicDiagonals, tol: float) -> None:
    n, nc = pair.n_fine, pair.n_coarse
    psi = dft_matrix(n)
    psi_c = dft_matrix(nc)
    t_int = psi.conj().T @ pair.interpolation @ psi_c
    expected = np.zeros((n, nc), dtype=complex)
    expected[np.arange(nc), np.arange(nc)] = diags.d
    expected[nc + np.arange(nc), np.arange(nc)] = diags.d_hat
    if np.max(np.abs(t_int - expected)) > tol:
        raise ConsistencyError(
            "transformed interpolation deviates from the two-diagonal form by "
            f"{np.max(np.abs(t_int - expected)):.3e}"
        )
    t_res = psi_c.conj().T @ pair.restriction @ psi
    expected_r = np.zeros((nc, n), dtype=complex)
    expected_r[np.arange(nc), np.arange(nc)] = 0.5 * diags.f
    expected_r[np.arange(nc), nc + np.arange(nc)] = 0.5 * diags.f_hat
    if np.max(np.abs(t_res - expected_r)) > tol:
        raise ConsistencyError(
            "transformed restriction deviates from the two-diagonal form by "
            f"{np.max(np.abs(t_res - expected_r)):.3e}"
        )


def node_propagation(m_nodes: int) -> np.ndarray:
    """M x M block copying the last node value onto every node."""
    k = np.zeros((m_nodes, m_nodes))
    k[:, -1] = 1.0
    return k


def check_restriction_condition(
    pair: TransferPair,
    m_nodes: int,
    temporal_restriction: np.ndarray | None = None,
) -> tuple[bool, np.ndarray]:
    """Commutator L = T_F^C N - N_tilde T_F^C of restriction and propagation.

    With spatial-only coarsening the temporal restriction is the identity and
    L vanishes exactly.  A non-trivial temporal restriction may break the
    condition; the violation is returned as data.
    """
    r_t = np.eye(m_nodes) if temporal_restriction is None else np.asarray(temporal_restriction)
    if r_t.shape[1] != m_nodes:
        raise DimensionError("temporal restriction has the wrong number of columns")
    r_st = np.kron(r_t, pair.restriction)
    n_fine = np.kron(node_propagation(m_nodes), np.eye(pair.n_fine))
    n_coarse = np.kron(node_propagation(r_t.shape[0]), np.eye(pair.n_coarse))
    violation = r_st @ n_fine - n_coarse @ r_st
    ok = bool(np.max(np.abs(violation)) == 0.0)
    return ok, violation
