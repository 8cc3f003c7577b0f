"""Block Fourier diagonalization of the PFASST iteration matrix.

Two granularities are supported.  Time-collocation blocks (one 2LM x 2LM
block per spatial harmonic pair) come from an exact similarity transform:
their eigenvalue union is the spectrum of the full iteration matrix.
Collocation blocks (2M x 2M, additionally indexed by a time frequency)
assume periodicity in time, which is an approximation; the singular
constant-in-time blocks at time frequency 0 are replaced by zero blocks and
the raw versions kept alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RangeError
from .linalg import Spectrum, dft_matrix, sort_eigenvalues
from .quadrature import QDelta, QuadratureRule
from .space_operators import CirculantOperator, circulant_eigenvalues
from .transfer import HarmonicDiagonals, TransferPair, harmonic_diagonals, node_propagation


@dataclass(frozen=True)
class TransformMeta:
    """Shapes and mode of the block transform, enough to invert it."""

    mode: str  # "time-collocation" or "collocation"
    n: int
    l: int
    m: int

    @property
    def block_dim(self) -> int:
        return 2 * self.l * self.m if self.mode == "time-collocation" else 2 * self.m

    def block_index(self) -> list[tuple]:
        if self.mode == "time-collocation":
            return [(k,) for k in range(self.n // 2)]
        return [(k, j) for k in range(self.n // 2) for j in range(self.l)]


@dataclass
class BlockDecomposition:
    """A family of dense blocks jointly similar to the full iteration matrix."""

    mode: str
    blocks: list[np.ndarray]
    index: list[tuple]
    meta: TransformMeta
    raw_blocks: list[np.ndarray] | None = None  # collocation mode, before zeroing


@dataclass(frozen=True)
class SpectralComponents:
    """Spectral data of one two-level configuration, ready for block assembly."""

    n: int
    l: int
    m: int
    dt: float
    q: np.ndarray
    qdelta: np.ndarray
    lam_fine: np.ndarray  # length N, harmonic order
    lam_coarse: np.ndarray  # length N/2, harmonic order
    diags: HarmonicDiagonals


def spectral_components(
    fine_op: CirculantOperator,
    coarse_op: CirculantOperator,
    rule: QuadratureRule,
    qdelta: QDelta,
    dt: float,
    l: int,
    pair: TransferPair,
) -> SpectralComponents:
    n = fine_op.n
    if n % 2:
        raise RangeError(f"block pairing needs an even grid size, got {n}")
    if coarse_op.n != n // 2 or pair.n_fine != n:
        raise RangeError("coarse operator / transfer pair do not match the fine grid")
    return SpectralComponents(
        n=n,
        l=l,
        m=rule.m,
        dt=dt,
        q=rule.q,
        qdelta=qdelta.matrix,
        lam_fine=circulant_eigenvalues(fine_op),
        lam_coarse=circulant_eigenvalues(coarse_op),
        diags=harmonic_diagonals(pair),
    )


def _tc_basic_blocks(sc: SpectralComponents):
    """Factories for the LM x LM basic blocks of the rigorous transform."""
    i_lm = np.eye(sc.l * sc.m)
    e = np.diag(np.ones(sc.l - 1), -1) if sc.l > 1 else np.zeros((1, 1))
    ek = np.kron(e, node_propagation(sc.m))
    il_q = np.kron(np.eye(sc.l), sc.q)
    il_qd = np.kron(np.eye(sc.l), sc.qdelta)

    def b_system(lam):
        return i_lm - ek - lam * sc.dt * il_q

    def b_smoother(lam):
        # The fine smoother is block Jacobi: no interval coupling in P.
        return i_lm - lam * sc.dt * il_qd

    def b_coarse(lam):
        return i_lm - ek - lam * sc.dt * il_qd

    return b_system, b_smoother, b_coarse


def _c_basic_blocks(sc: SpectralComponents):
    """Factories for the M x M basic blocks under assumed time periodicity."""
    i_m = np.eye(sc.m)
    kprop = node_propagation(sc.m)

    def b_system(lam, j):
        return i_m - lam * sc.dt * sc.q - np.exp(-2j * np.pi * j / sc.l) * kprop

    def b_smoother(lam, j):
        return i_m - lam * sc.dt * sc.qdelta

    def b_coarse(lam, j):
        return i_m - lam * sc.dt * sc.qdelta - np.exp(-2j * np.pi * j / sc.l) * kprop

    return b_system, b_smoother, b_coarse


def _paired_block(sc, k, b_system, b_smoother, b_coarse, *args):
    """S * CGC for the harmonic pair (k, k + N/2) from basic-block factories."""
    lam_lo = sc.lam_fine[k]
    lam_hi = sc.lam_fine[k + sc.n // 2]
    bm_lo = b_system(lam_lo, *args)
    bm_hi = b_system(lam_hi, *args)
    dim = bm_lo.shape[0]
    eye = np.eye(dim)

    s = np.zeros((2 * dim, 2 * dim), dtype=complex)
    s[:dim, :dim] = eye - np.linalg.solve(b_smoother(lam_lo, *args), bm_lo)
    s[dim:, dim:] = eye - np.linalg.solve(b_smoother(lam_hi, *args), bm_hi)

    pt = b_coarse(sc.lam_coarse[k], *args)
    x_lo = np.linalg.solve(pt, bm_lo)
    x_hi = np.linalg.solve(pt, bm_hi)
    d, d_hat = sc.diags.d[k], sc.diags.d_hat[k]
    f, f_hat = sc.diags.f[k], sc.diags.f_hat[k]
    cgc = np.zeros_like(s)
    cgc[:dim, :dim] = eye - 0.5 * d * f * x_lo
    cgc[:dim, dim:] = -0.5 * d * f_hat * x_hi
    cgc[dim:, :dim] = -0.5 * d_hat * f * x_lo
    cgc[dim:, dim:] = eye - 0.5 * d_hat * f_hat * x_hi
    return s @ cgc


def tc_decompose(sc: SpectralComponents) -> BlockDecomposition:
    """N/2 time-collocation blocks of size 2LM; an exact similarity transform."""
    b_system, b_smoother, b_coarse = _tc_basic_blocks(sc)
    meta = TransformMeta(mode="time-collocation", n=sc.n, l=sc.l, m=sc.m)
    blocks = [
        _paired_block(sc, k, b_system, b_smoother, b_coarse)
        for k in range(sc.n // 2)
    ]
    return BlockDecomposition(mode="time-collocation", blocks=blocks, index=meta.block_index(), meta=meta)


def c_decompose(sc: SpectralComponents) -> BlockDecomposition:
    """N/2 * L collocation blocks of size 2M, assuming periodicity in time.

    Time frequency j = 0 belongs to constant-in-time modes whose coarse
    basic block is singular; those blocks are zeroed and the raw versions
    kept in ``raw_blocks`` (entries may be None where singular).
    """
    b_system, b_smoother, b_coarse = _c_basic_blocks(sc)
    meta = TransformMeta(mode="collocation", n=sc.n, l=sc.l, m=sc.m)
    blocks: list[np.ndarray] = []
    raw: list[np.ndarray | None] = []
    for k in range(sc.n // 2):
        for j in range(sc.l):
            try:
                block = _paired_block(sc, k, b_system, b_smoother, b_coarse, j)
            except np.linalg.LinAlgError:
                block = None
            raw.append(block)
            if j == 0 or block is None:
                blocks.append(np.zeros((meta.block_dim, meta.block_dim), dtype=complex))
            else:
                blocks.append(block)
    return BlockDecomposition(
        mode="collocation", blocks=blocks, index=meta.block_index(), meta=meta, raw_blocks=raw
    )


def transform_vector(v: np.ndarray, meta: TransformMeta) -> np.ndarray:
    """Map a space-time vector into block coordinates, one row per block.

    Applies the conjugate-transposed Fourier matrix on the spatial layer
    (and on the interval layer for collocation mode) and gathers the
    harmonic pairs.  The map is unitary: 2-norms are preserved.
    """
    n, l, m = meta.n, meta.l, meta.m
    grid = np.asarray(v).reshape(l, m, n)
    psi_h = dft_matrix(n).conj().T
    hat = np.einsum("kn,lmn->lmk", psi_h, grid)
    if meta.mode == "collocation":
        psi_l_h = dft_matrix(l).conj().T
        hat = np.einsum("jl,lmk->jmk", psi_l_h, hat)
        out = np.empty((n // 2 * l, 2 * m), dtype=complex)
        row = 0
        for k in range(n // 2):
            for j in range(l):
                out[row] = np.concatenate((hat[j, :, k], hat[j, :, k + n // 2]))
                row += 1
        return out
    out = np.empty((n // 2, 2 * l * m), dtype=complex)
    for k in range(n // 2):
        out[k] = np.concatenate((hat[:, :, k].ravel(), hat[:, :, k + n // 2].ravel()))
    return out


def inverse_transform_vector(vhat: np.ndarray, meta: TransformMeta) -> np.ndarray:
    """Invert :func:`transform_vector`; returns the flat (L, M, N) vector."""
    n, l, m = meta.n, meta.l, meta.m
    hat = np.empty((l, m, n), dtype=complex)
    if meta.mode == "collocation":
        tmp = np.empty((l, m, n), dtype=complex)
        row = 0
        for k in range(n // 2):
            for j in range(l):
                tmp[j, :, k] = vhat[row, :m]
                tmp[j, :, k + n // 2] = vhat[row, m:]
                row += 1
        psi_l = dft_matrix(l)
        hat = np.einsum("lj,jmk->lmk", psi_l, tmp)
    else:
        for k in range(n // 2):
            hat[:, :, k] = vhat[k, : l * m].reshape(l, m)
            hat[:, :, k + n // 2] = vhat[k, l * m :].reshape(l, m)
    psi = dft_matrix(n)
    grid = np.einsum("nk,lmk->lmn", psi, hat)
    return grid.ravel()


def apply_blocks(d: BlockDecomposition, vhat: np.ndarray, harmonics: set[int] | None = None) -> np.ndarray:
    """Apply the block-diagonal iteration matrix to transformed coordinates.

    ``harmonics`` optionally restricts the application to blocks whose
    spatial-harmonic index is in the set; other rows are zeroed (they carry
    no energy for single-mode initial data).
    """
    out = np.zeros_like(vhat)
    for i, (block, idx) in enumerate(zip(d.blocks, d.index)):
        if harmonics is not None and idx[0] not in harmonics:
            continue
        out[i] = block @ vhat[i]
    return out


@dataclass(frozen=True)
class BlockSpectra:
    """Per-block eigenvalues plus the aggregates used by the estimators."""

    per_block: list[Spectrum]
    index: list[tuple]
    spectral_radius: float
    norm: float


def block_spectra(d: BlockDecomposition) -> BlockSpectra:
    per_block = []
    rho = 0.0
    norm = 0.0
    for block in d.blocks:
        vals = sort_eigenvalues(np.linalg.eigvals(block))
        per_block.append(Spectrum(vals, block.shape[0]))
        if len(vals):
            rho = max(rho, float(np.max(np.abs(vals))))
        norm = max(norm, float(np.linalg.norm(block, 2)))
    return BlockSpectra(per_block=per_block, index=list(d.index), spectral_radius=rho, norm=norm)


def block_power_norm(d: BlockDecomposition, kappa: int) -> float:
    """max over blocks of ||B^kappa||_2, i.e. ||T^kappa||_2 block-wise."""
    if kappa < 0:
        raise RangeError("power must be nonnegative")
    norm = 0.0
    for block in d.blocks:
        norm = max(norm, float(np.linalg.norm(np.linalg.matrix_power(block, kappa), 2)))
    return norm


def eigenvalue_union(d: BlockDecomposition) -> np.ndarray:
    """Sorted multiset union of all block eigenvalues."""
    vals = np.concatenate([np.linalg.eigvals(b) for b in d.blocks])
    return sort_eigenvalues(vals)


def cluster_eigenvalues(vals: np.ndarray, tol: float = 2e-4) -> list[tuple[int, complex]]:
    """Group eigenvalues into clusters of nearby values; (multiplicity, mean).

    The iteration matrix has defective eigenvalues of high multiplicity; a
    double-precision eigensolver scatters each into a ring of radius roughly
    eps^(1/p) around the true value.  Individual ring members are therefore
    meaningless to compare, but the cluster mean cancels the ring scatter and
    is accurate to round-off.  Single-linkage clustering at the given
    tolerance (above the scatter radius, below the cluster gaps) recovers the
    true (value, multiplicity) pairs.
    """
    from scipy.cluster.hierarchy import fcluster, linkage
    from scipy.spatial.distance import pdist

    vals = np.asarray(vals)
    if len(vals) == 1:
        return [(1, complex(vals[0]))]
    pts = np.column_stack([vals.real, vals.imag])
    labels = fcluster(linkage(pdist(pts), method="single"), tol, criterion="distance")
    out = []
    for c in np.unique(labels):
        sel = vals[labels == c]
        out.append((len(sel), complex(sel.mean())))
    return out


def matched_cluster_distance(
    a: np.ndarray, b: np.ndarray, tols: tuple[float, ...] = (1e-4, 2e-4, 5e-4, 1e-3)
) -> float:
    """Max distance between matched eigenvalue clusters of two spectra.

    Each clustering tolerance in ``tols`` is tried; the best (smallest)
    matched distance over tolerances at which both spectra produce the same
    cluster structure is returned, inf if no tolerance does.  The right
    linkage scale sits between the eigensolver scatter radius and the
    cluster gaps, and both vary with the problem size; scanning a ladder
    avoids hand-tuning, and cannot produce a false match because the
    returned distance itself measures the agreement of the cluster means.
    """
    best = float("inf")
    for tol in tols:
        best = min(best, _matched_cluster_distance_at(np.asarray(a), np.asarray(b), tol))
    return best


def _matched_cluster_distance_at(a: np.ndarray, b: np.ndarray, tol: float) -> float:
    from scipy.optimize import linear_sum_assignment

    ca = cluster_eigenvalues(a, tol)
    cb = cluster_eigenvalues(b, tol)
    if len(ca) != len(cb):
        return float("inf")
    if sorted(m for m, _ in ca) != sorted(m for m, _ in cb):
        return float("inf")
    mult_a = np.array([m for m, _ in ca])
    mult_b = np.array([m for m, _ in cb])
    mean_a = np.array([v for _, v in ca])
    mean_b = np.array([v for _, v in cb])
    cost = np.abs(mean_a[:, None] - mean_b[None, :])
    cost = np.where(mult_a[:, None] == mult_b[None, :], cost, np.inf)
    try:
        rows, cols = linear_sum_assignment(cost)
    except ValueError:  # infeasible: no multiplicity-respecting matching
        return float("inf")
    return float(cost[rows, cols].max())
