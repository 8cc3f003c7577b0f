"""Iterative solvers: SDC, MLSDC, block Gauss-Seidel/Jacobi and PFASST.

Every method exists twice: as a step procedure (the way one would run it)
and as an explicit preconditioner/iteration matrix (the way one analyzes
it).  The tests pin the two routes against each other.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .collocation import CollocationProblem, CompositeSystem, spread_initial
from .errors import ConfigurationError, FactorizationError
from .quadrature import QDelta, build_qdelta
from .transfer import TransferPair, check_restriction_condition, node_propagation


@dataclass
class Preconditioner:
    """A matrix P whose (cached-LU) inverse defines one Richardson step."""

    kind: str
    matrix: np.ndarray
    level_tag: str = "fine"
    _lu: tuple = field(default=None, repr=False)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._lu is None:
            try:
                with warnings.catch_warnings():
                    # the zero-pivot check below turns the warning into an error
                    warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                    self._lu = scipy.linalg.lu_factor(self.matrix)
            except (ValueError, np.linalg.LinAlgError) as exc:
                raise FactorizationError(f"cannot factor preconditioner: {exc}") from exc
            if np.any(np.diag(self._lu[0]) == 0):
                raise FactorizationError("singular preconditioner")
        return scipy.linalg.lu_solve(self._lu, rhs)


def sdc_preconditioner(problem: CollocationProblem, qdelta: QDelta, level_tag: str = "fine") -> Preconditioner:
    """P = I - dt*(Q_Delta kron A)."""
    mat = np.eye(problem.dim) - problem.dt * np.kron(qdelta.matrix, problem.a)
    return Preconditioner(kind=f"sdc-{level_tag}", matrix=mat, level_tag=level_tag)


def composite_gauss_seidel(p_single: Preconditioner, l: int, n_matrix: np.ndarray) -> Preconditioner:
    """Block lower-bidiagonal preconditioner: P blocks on the diagonal, -N below."""
    d = p_single.matrix.shape[0]
    mat = np.kron(np.eye(l), p_single.matrix)
    for i in range(1, l):
        mat[i * d : (i + 1) * d, (i - 1) * d : i * d] = -n_matrix
    return Preconditioner(kind="block-gs", matrix=mat, level_tag=p_single.level_tag)


def composite_jacobi(p_single: Preconditioner, l: int) -> Preconditioner:
    """Block-diagonal preconditioner: independent intervals."""
    return Preconditioner(
        kind="block-jacobi",
        matrix=np.kron(np.eye(l), p_single.matrix),
        level_tag=p_single.level_tag,
    )


def richardson_step(p: Preconditioner, m: np.ndarray, c: np.ndarray, u: np.ndarray) -> np.ndarray:
    """u + P^{-1}(c - M u)."""
    return u + p.solve(c - m @ u)


def lift_transfer(pair: TransferPair, m_nodes: int, l: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Spatial transfer operators lifted to the (L, M, N) space-time layout."""
    eye = np.eye(l * m_nodes)
    return np.kron(eye, pair.interpolation), np.kron(eye, pair.restriction)


def mlsdc_step(
    fine: Preconditioner,
    coarse: Preconditioner,
    pair: TransferPair,
    m: np.ndarray,
    c: np.ndarray,
    u: np.ndarray,
    m_nodes: int,
    l: int = 1,
) -> np.ndarray:
    """One two-level step: coarse-corrected half step, then a fine sweep."""
    ok, violation = check_restriction_condition(pair, m_nodes)
    if not ok:
        raise ConfigurationError(
            f"restriction condition violated, |L|_inf = {np.max(np.abs(violation)):.3e}"
        )
    t_up, t_down = lift_transfer(pair, m_nodes, l)
    residual = c - m @ u
    u_half = u + t_up @ coarse.solve(t_down @ residual)
    return u_half + fine.solve(c - m @ u_half)


def mlsdc_preconditioner_inverse(
    fine: Preconditioner, coarse: Preconditioner, pair: TransferPair, m: np.ndarray, m_nodes: int, l: int = 1
) -> np.ndarray:
    """The explicit P_MLSDC^{-1} combining both levels in one matrix."""
    t_up, t_down = lift_transfer(pair, m_nodes, l)
    cgc = t_up @ coarse.solve(t_down)
    p_inv = fine.solve(np.eye(m.shape[0]))
    return cgc + p_inv - p_inv @ m @ cgc


def pfasst_step_matrix(
    coarse_gs: Preconditioner,
    fine_jacobi: Preconditioner,
    pair: TransferPair,
    m: np.ndarray,
    c: np.ndarray,
    u: np.ndarray,
    m_nodes: int,
    l: int,
) -> np.ndarray:
    """One PFASST iteration on the composite problem, in matrix form.

    The fine sweep starts from the coarse-corrected half step; this is the
    form whose error propagation factors into the PFASST iteration matrix.
    """
    t_up, t_down = lift_transfer(pair, m_nodes, l)
    u_half = u + t_up @ coarse_gs.solve(t_down @ (c - m @ u))
    return u_half + fine_jacobi.solve(c - m @ u_half)


@dataclass(frozen=True)
class IterationOperator:
    """Error-propagation matrix T with a record of how it was built."""

    t: np.ndarray
    builder: str


def build_iteration_matrix(kind: str, **parts) -> IterationOperator:
    """Materialize T for one of the supported methods.

    kind "sdc":    parts p, m.
    kind "mlsdc":  parts fine, coarse, pair, m, m_nodes (l optional).
    kind "pfasst": parts coarse_gs, fine_jacobi, pair, m, m_nodes, l.
    """
    if kind == "sdc":
        p, m = parts["p"], parts["m"]
        t = np.eye(m.shape[0]) - p.solve(m)
        return IterationOperator(t=t, builder="I - P_sdc^{-1} M")
    if kind == "mlsdc":
        p_inv = mlsdc_preconditioner_inverse(
            parts["fine"], parts["coarse"], parts["pair"], parts["m"], parts["m_nodes"], parts.get("l", 1)
        )
        t = np.eye(parts["m"].shape[0]) - p_inv @ parts["m"]
        return IterationOperator(t=t, builder="I - P_mlsdc^{-1} M")
    if kind == "pfasst":
        m = parts["m"]
        t_up, t_down = lift_transfer(parts["pair"], parts["m_nodes"], parts["l"])
        cgc_factor = np.eye(m.shape[0]) - t_up @ parts["coarse_gs"].solve(t_down @ m)
        smoother_factor = np.eye(m.shape[0]) - parts["fine_jacobi"].solve(m)
        return IterationOperator(
            t=smoother_factor @ cgc_factor,
            builder="(I - Phat^{-1} M)(I - T_up Ptilde^{-1} T_down M)",
        )
    raise ConfigurationError(f"unknown iteration-matrix kind {kind!r}")


@dataclass
class TwoLevelSetup:
    """Everything one PFASST run needs, assembled once and reused."""

    fine: CollocationProblem
    coarse: CollocationProblem
    pair: TransferPair
    l: int
    p_fine: Preconditioner
    p_coarse: Preconditioner

    @property
    def m_nodes(self) -> int:
        return self.fine.rule.m

    def interval_transfer(self) -> tuple[np.ndarray, np.ndarray]:
        return lift_transfer(self.pair, self.m_nodes, 1)

    def node_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        k = node_propagation(self.m_nodes)
        return (
            np.kron(k, np.eye(self.fine.n_space)),
            np.kron(k, np.eye(self.coarse.n_space)),
        )

    def composite_preconditioners(self) -> tuple[Preconditioner, Preconditioner]:
        """(coarse block Gauss-Seidel, fine block Jacobi) on the full domain."""
        _, n_c = self.node_matrices()
        return (
            composite_gauss_seidel(self.p_coarse, self.l, n_c),
            composite_jacobi(self.p_fine, self.l),
        )


def build_two_level_setup(
    fine: CollocationProblem,
    coarse: CollocationProblem,
    pair: TransferPair,
    l: int,
    qdelta_kind: str,
) -> TwoLevelSetup:
    qd_f = build_qdelta(fine.rule, qdelta_kind)
    qd_c = build_qdelta(coarse.rule, qdelta_kind)
    return TwoLevelSetup(
        fine=fine,
        coarse=coarse,
        pair=pair,
        l=l,
        p_fine=sdc_preconditioner(fine, qd_f, "fine"),
        p_coarse=sdc_preconditioner(coarse, qd_c, "coarse"),
    )


def pfasst_run_algorithmic(
    setup: TwoLevelSetup,
    u0: np.ndarray,
    iterations: int,
    n_fine: int = 1,
    n_coarse: int = 1,
    rhs_blocks: list[np.ndarray] | None = None,
    initial_state: np.ndarray | None = None,
) -> list[np.ndarray]:
    """Run PFASST by simulating the per-processor message schedule serially.

    Each iteration: every interval restricts its iterate, forms the FAS
    correction, receives the coarse initial value from its predecessor
    (Gauss-Seidel order), sweeps on the coarse level, sends, interpolates
    the corrections and finally performs fine sweeps that only use values
    already available (Jacobi order).  Returns all iterates, flattened to
    length L*M*N, starting with the spread initial iterate (or with
    ``initial_state``, e.g. to propagate an error vector through the
    homogeneous iteration).
    """
    l_count, m_f, m_c = setup.l, setup.fine.matrix, setup.coarse.matrix
    t_up, t_down = setup.interval_transfer()
    n_f, n_c = setup.node_matrices()
    if rhs_blocks is None:
        rhs_blocks = [np.zeros(setup.fine.dim) for _ in range(l_count)]
        rhs_blocks[0] = spread_initial(u0, setup.m_nodes)
    dtype = np.result_type(np.asarray(u0), *rhs_blocks, float)

    if initial_state is not None:
        u = np.asarray(initial_state).reshape(l_count, setup.fine.dim).astype(dtype)
    else:
        u = np.tile(spread_initial(u0, setup.m_nodes), (l_count, 1)).astype(dtype)
    trace = [u.ravel().copy()]
    for _ in range(iterations):
        u_half = np.empty_like(u)
        coarse_half = np.empty((l_count, setup.coarse.dim), dtype=dtype)
        for l in range(l_count):
            restricted = t_down @ u[l]
            tau = m_c @ restricted - t_down @ (m_f @ u[l])
            c_tilde = t_down @ rhs_blocks[l]
            if l > 0:
                c_tilde = c_tilde + n_c @ coarse_half[l - 1]
            ut = restricted
            for _ in range(n_coarse):
                ut = ut + setup.p_coarse.solve(c_tilde + tau - m_c @ ut)
            coarse_half[l] = ut
            u_half[l] = u[l] + t_up @ (ut - restricted)
        u_new = np.empty_like(u)
        for l in range(l_count):
            c_fine = rhs_blocks[l]
            if l > 0:
                c_fine = c_fine + n_f @ u_half[l - 1]
            un = u_half[l]
            for _ in range(n_fine):
                un = un + setup.p_fine.solve(c_fine - m_f @ un)
            u_new[l] = un
        u = u_new
        trace.append(u.ravel().copy())
    return trace


def composite_from_setup(setup: TwoLevelSetup, u0: np.ndarray) -> CompositeSystem:
    from .collocation import composite_system

    return composite_system(setup.fine, setup.l, u0)
