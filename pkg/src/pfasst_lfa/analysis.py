"""Error prediction strategies and comparison against actual PFASST runs.

Four estimation strategies are supported, all reported in the 2-norm (the
norm in which the block decomposition is exact and the bound chain
||e^k|| <= ||T^k|| ||e^0|| <= ||T||^k ||e^0|| holds):

  rho         ||e^0|| * rho(T)^k      (asymptotic rate)
  norm        ||e^0|| * ||T||^k       (a priori upper bound)
  norm-power  ||T^k|| * ||e^0||       (sharper a priori upper bound)
  apply       ||T^k e^0||             (a posteriori; exact block-wise)

The actual run integrates a single Fourier mode sin(2*pi*k*x) with a
manufactured right-hand side chosen so the discrete solution coincides with
the analytic PDE solution at every space-time node; the "apply" strategy in
time-collocation mode then reproduces the actual error to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collocation import collocation_matrix, spread_initial
from .errors import ConfigurationError, RangeError
from .quadrature import QuadratureRule, build_qdelta
from .space_operators import ModelProblem, coarsen, exact_solution, make_advection, make_diffusion
from .solvers import TwoLevelSetup, build_two_level_setup, pfasst_run_algorithmic
from .transfer import build_ci_pair
from . import lfa

STRATEGIES = ("rho", "norm", "norm-power", "apply")
BLOCK_MODES = ("tc", "c", "full")


@dataclass(frozen=True)
class ExperimentConfig:
    """One two-level PFASST experiment on a single Fourier mode."""

    problem: str
    n: int = 128
    m: int = 5
    l: int = 4
    dt: float = 0.1
    coefficient: float | None = None
    mu: float | None = None
    wavenumber: int = 1
    iterations: int = 10
    qdelta_kind: str | None = None
    interp_exactness: int = 6
    restr_exactness: int = 2

    def __post_init__(self):
        if self.problem not in ("diffusion", "advection"):
            raise ConfigurationError(f"unknown problem {self.problem!r}")
        if self.mu is not None and self.problem != "diffusion":
            raise ConfigurationError("the mesh ratio mu applies to diffusion only")
        if (self.coefficient is None) == (self.mu is None):
            raise ConfigurationError("give exactly one of coefficient and mu")
        if self.iterations < 0:
            raise RangeError(f"iteration count must be >= 0, got {self.iterations}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    def resolved_coefficient(self) -> float:
        """nu or c; mu is the parabolic mesh ratio nu*dt/dx^2."""
        if self.coefficient is not None:
            return self.coefficient
        return self.mu * self.dx**2 / self.dt

    def resolved_qdelta_kind(self) -> str:
        if self.qdelta_kind is not None:
            return self.qdelta_kind
        return "implicit-euler" if self.problem == "diffusion" else "lu"

    def make_problem(self) -> ModelProblem:
        maker = make_diffusion if self.problem == "diffusion" else make_advection
        return maker(self.n, self.resolved_coefficient())


@dataclass(frozen=True)
class ExperimentContext:
    """Assembled operators for one configuration, built once and shared."""

    cfg: ExperimentConfig
    fine: ModelProblem
    coarse: ModelProblem
    rule: QuadratureRule
    setup: TwoLevelSetup
    components: lfa.SpectralComponents


def build_context(cfg: ExperimentConfig) -> ExperimentContext:
    fine = cfg.make_problem()
    coarse = coarsen(fine)
    rule = QuadratureRule.radau_right(cfg.m)
    pair = build_ci_pair(cfg.n, cfg.interp_exactness, cfg.restr_exactness)
    setup = build_two_level_setup(
        collocation_matrix(fine.operator.materialize(), rule, cfg.dt),
        collocation_matrix(coarse.operator.materialize(), rule, cfg.dt),
        pair,
        cfg.l,
        cfg.resolved_qdelta_kind(),
    )
    components = lfa.spectral_components(
        fine.operator,
        coarse.operator,
        rule,
        build_qdelta(rule, cfg.resolved_qdelta_kind()),
        cfg.dt,
        cfg.l,
        pair,
    )
    return ExperimentContext(
        cfg=cfg, fine=fine, coarse=coarse, rule=rule, setup=setup, components=components
    )


def node_times(cfg: ExperimentConfig, rule: QuadratureRule) -> np.ndarray:
    """Absolute times t_l + dt*tau_m, shaped (L, M)."""
    starts = cfg.dt * np.arange(cfg.l)
    return starts[:, None] + cfg.dt * rule.nodes[None, :]


def exact_trajectory(ctx: ExperimentContext) -> np.ndarray:
    """Analytic PDE solution sampled at every (interval, node, grid point)."""
    cfg = ctx.cfg
    times = node_times(cfg, ctx.rule)
    out = np.empty((cfg.l, cfg.m, cfg.n))
    for i in range(cfg.l):
        for j in range(cfg.m):
            out[i, j] = exact_solution(ctx.fine, cfg.wavenumber, times[i, j])
    return out.ravel()


def error_vector(ctx: ExperimentContext, iterate: np.ndarray) -> np.ndarray:
    """Difference between a space-time iterate and the analytic solution."""
    return np.asarray(iterate) - exact_trajectory(ctx)


def initial_iterate(ctx: ExperimentContext) -> np.ndarray:
    """The spread iterate: u0 copied to every node of every interval."""
    u0 = exact_solution(ctx.fine, ctx.cfg.wavenumber, 0.0)
    return np.tile(spread_initial(u0, ctx.cfg.m), ctx.cfg.l)


def manufactured_rhs(ctx: ExperimentContext) -> list[np.ndarray]:
    """Per-interval right-hand sides whose discrete solution is the analytic one.

    Multiplying the composite matrix block row by the sampled analytic
    trajectory gives a right-hand side for which the collocation solution
    equals the analytic samples exactly; the iteration error is then exactly
    iterate minus analytic samples, which the block analysis can reproduce.
    """
    cfg = ctx.cfg
    u_ex = exact_trajectory(ctx).reshape(cfg.l, -1)
    m_f = ctx.setup.fine.matrix
    n_f, _ = ctx.setup.node_matrices()
    blocks = []
    for i in range(cfg.l):
        rhs = m_f @ u_ex[i]
        if i > 0:
            rhs = rhs - n_f @ u_ex[i - 1]
        blocks.append(rhs)
    return blocks


def excited_blocks(cfg: ExperimentConfig) -> set[int]:
    """Spatial-harmonic block indices carrying energy for sin(2 pi k x) data.

    The mode excites harmonics k and N-k; coarse-grid correction mixes each
    with its +N/2 alias, which lives in the same paired block, so the set
    stays invariant under the iteration.
    """
    n, k = cfg.n, cfg.wavenumber % cfg.n
    half = n // 2
    out = set()
    for h in (k, (n - k) % n):
        out.add(h if h < half else h - half)
    return out


def _decomposition(ctx: ExperimentContext, block_mode: str) -> lfa.BlockDecomposition:
    if block_mode == "tc":
        return lfa.tc_decompose(ctx.components)
    if block_mode == "c":
        return lfa.c_decompose(ctx.components)
    raise ConfigurationError(f"no block decomposition for mode {block_mode!r}")


def _full_matrix(ctx: ExperimentContext) -> np.ndarray:
    from .collocation import composite_system
    from .solvers import build_iteration_matrix

    comp = composite_system(ctx.setup.fine, ctx.cfg.l, np.zeros(ctx.cfg.n))
    p_gs, p_j = ctx.setup.composite_preconditioners()
    return build_iteration_matrix(
        "pfasst",
        coarse_gs=p_gs,
        fine_jacobi=p_j,
        pair=ctx.setup.pair,
        m=comp.matrix,
        m_nodes=ctx.cfg.m,
        l=ctx.cfg.l,
    ).t


@dataclass
class Prediction:
    """K+1 predicted error values for one strategy and block mode."""

    strategy: str
    block_mode: str
    values: np.ndarray


def predict(
    ctx: ExperimentContext,
    strategy: str,
    block_mode: str,
    kappa: int | None = None,
    restrict_harmonics: bool = True,
) -> Prediction:
    """Predicted 2-norm error for iterations 0..K."""
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    if block_mode not in BLOCK_MODES:
        raise ConfigurationError(f"unknown block mode {block_mode!r}")
    k_max = ctx.cfg.iterations if kappa is None else kappa
    e0 = error_vector(ctx, initial_iterate(ctx))
    e0_norm = float(np.linalg.norm(e0))
    values = np.empty(k_max + 1)
    values[0] = e0_norm

    if block_mode == "full":
        t = _full_matrix(ctx)
        if strategy == "rho":
            rho = float(np.max(np.abs(np.linalg.eigvals(t)))) if t.size else 0.0
            values[1:] = e0_norm * rho ** np.arange(1, k_max + 1)
        elif strategy == "norm":
            nrm = float(np.linalg.norm(t, 2))
            values[1:] = e0_norm * nrm ** np.arange(1, k_max + 1)
        elif strategy == "norm-power":
            power = np.eye(t.shape[0])
            for k in range(1, k_max + 1):
                power = power @ t
                values[k] = float(np.linalg.norm(power, 2)) * e0_norm
        else:
            e = e0.astype(complex)
            for k in range(1, k_max + 1):
                e = t @ e
                values[k] = float(np.linalg.norm(e))
        return Prediction(strategy=strategy, block_mode=block_mode, values=values)

    d = _decomposition(ctx, block_mode)
    if strategy == "rho":
        rho = lfa.block_spectra(d).spectral_radius
        values[1:] = e0_norm * rho ** np.arange(1, k_max + 1)
    elif strategy == "norm":
        nrm = lfa.block_spectra(d).norm
        values[1:] = e0_norm * nrm ** np.arange(1, k_max + 1)
    elif strategy == "norm-power":
        for k in range(1, k_max + 1):
            values[k] = lfa.block_power_norm(d, k) * e0_norm
    else:
        harmonics = excited_blocks(ctx.cfg) if restrict_harmonics else None
        ehat = lfa.transform_vector(e0, d.meta)
        for k in range(1, k_max + 1):
            ehat = lfa.apply_blocks(d, ehat, harmonics=harmonics)
            values[k] = float(np.linalg.norm(ehat))
    return Prediction(strategy=strategy, block_mode=block_mode, values=values)


@dataclass
class PhaseSegmentation:
    """Piecewise-linear segmentation of log10(error) vs. iteration."""

    boundaries: list[int]  # segment start indices, first is 0
    slopes: list[float]
    residuals: list[float]  # sum of squares for the 1-, 2-, 3-segment fits

    @property
    def count(self) -> int:
        return len(self.boundaries)


def _segment_sse(y: np.ndarray) -> tuple[float, float]:
    """Least-squares line fit of y against its index; (sse, slope)."""
    x = np.arange(len(y), dtype=float)
    if len(y) < 2:
        return 0.0, 0.0
    coeffs = np.polyfit(x, y, 1)
    resid = y - np.polyval(coeffs, x)
    return float(resid @ resid), float(coeffs[0])


def detect_phases(errors: np.ndarray, min_len: int = 3, improvement: float = 0.25, rel_floor: float = 1e-14) -> PhaseSegmentation:
    """Segment log10(error) into 1-3 linear pieces.

    An extra segment is accepted only when it shrinks the fit residual by
    more than the improvement fraction.  Values below rel_floor times the
    initial error are excluded: they sit outside the observable range of a
    double-precision run and carry no slope information.
    """
    errors = np.asarray(errors, dtype=float)
    mask = errors > rel_floor * errors[0]
    y = np.log10(errors[mask])
    n = len(y)
    if n < 2 * min_len:
        sse, slope = _segment_sse(y)
        return PhaseSegmentation(boundaries=[0], slopes=[slope], residuals=[sse])

    sse1, slope1 = _segment_sse(y)
    # a residual this small is indistinguishable from a straight line;
    # splitting it further would only chase noise
    noise_sse = 1e-10
    if sse1 <= noise_sse:
        return PhaseSegmentation(boundaries=[0], slopes=[slope1], residuals=[sse1])

    best2 = None
    for b in range(min_len, n - min_len + 1):
        s_a, sl_a = _segment_sse(y[:b])
        s_b, sl_b = _segment_sse(y[b:])
        if best2 is None or s_a + s_b < best2[0]:
            best2 = (s_a + s_b, [0, b], [sl_a, sl_b])

    best3 = None
    for b1 in range(min_len, n - 2 * min_len + 1):
        s_a, sl_a = _segment_sse(y[:b1])
        for b2 in range(b1 + min_len, n - min_len + 1):
            s_b, sl_b = _segment_sse(y[b1:b2])
            s_c, sl_c = _segment_sse(y[b2:])
            total = s_a + s_b + s_c
            if best3 is None or total < best3[0]:
                best3 = (total, [0, b1, b2], [sl_a, sl_b, sl_c])

    residuals = [sse1, best2[0], best3[0] if best3 else best2[0]]
    if best2[0] >= (1.0 - improvement) * sse1:
        return PhaseSegmentation(boundaries=[0], slopes=[slope1], residuals=residuals)
    if best3 is None or best2[0] <= noise_sse or best3[0] >= (1.0 - improvement) * best2[0]:
        return PhaseSegmentation(boundaries=best2[1], slopes=best2[2], residuals=residuals)
    return PhaseSegmentation(boundaries=best3[1], slopes=best3[2], residuals=residuals)


@dataclass
class ErrorTrace:
    """Actual and predicted error history of one experiment.

    The actual error is measured by propagating the initial error through
    the homogeneous PFASST iteration (linearity makes this identical to the
    error of the inhomogeneous run, but free of the cancellation that caps
    the directly subtracted error at round-off level).  The subtracted
    errors of the inhomogeneous run are kept as u_run_inf / u_run_2 and
    cross-checked against the propagated ones.
    """

    cfg: ExperimentConfig
    actual_inf: np.ndarray
    actual_2: np.ndarray
    u_run_inf: np.ndarray
    u_run_2: np.ndarray
    predictions: list[Prediction]
    phases: PhaseSegmentation
    aggregates: dict  # per block mode: {"rho": float, "norm": float}

    def prediction(self, strategy: str, block_mode: str) -> Prediction:
        for p in self.predictions:
            if p.strategy == strategy and p.block_mode == block_mode:
                return p
        raise KeyError((strategy, block_mode))

    def consistency_gap(self) -> float:
        """Max abs deviation between propagated and subtracted error norms."""
        return float(np.max(np.abs(self.actual_2 - self.u_run_2)))


def run_and_compare(
    cfg: ExperimentConfig,
    strategies: tuple[str, ...] = STRATEGIES,
    block_modes: tuple[str, ...] = ("tc",),
) -> ErrorTrace:
    """Run algorithmic PFASST and attach all requested predictions."""
    ctx = build_context(cfg)
    u0 = exact_solution(ctx.fine, cfg.wavenumber, 0.0)
    u_ex = exact_trajectory(ctx)
    e0 = initial_iterate(ctx) - u_ex
    zero_rhs = [np.zeros(ctx.setup.fine.dim) for _ in range(cfg.l)]
    error_trace = pfasst_run_algorithmic(
        ctx.setup, u0, cfg.iterations, rhs_blocks=zero_rhs, initial_state=e0
    )
    actual_inf = np.array([np.max(np.abs(e)) for e in error_trace])
    actual_2 = np.array([np.linalg.norm(e) for e in error_trace])
    u_trace = pfasst_run_algorithmic(
        ctx.setup, u0, cfg.iterations, rhs_blocks=manufactured_rhs(ctx)
    )
    u_run_inf = np.array([np.max(np.abs(u - u_ex)) for u in u_trace])
    u_run_2 = np.array([np.linalg.norm(u - u_ex) for u in u_trace])

    predictions = [
        predict(ctx, strategy, mode)
        for mode in block_modes
        for strategy in strategies
    ]
    aggregates = {}
    for mode in block_modes:
        if mode == "full":
            t = _full_matrix(ctx)
            aggregates[mode] = {
                "rho": float(np.max(np.abs(np.linalg.eigvals(t)))),
                "norm": float(np.linalg.norm(t, 2)),
            }
        else:
            bs = lfa.block_spectra(_decomposition(ctx, mode))
            aggregates[mode] = {"rho": bs.spectral_radius, "norm": bs.norm}

    return ErrorTrace(
        cfg=cfg,
        actual_inf=actual_inf,
        actual_2=actual_2,
        u_run_inf=u_run_inf,
        u_run_2=u_run_2,
        predictions=predictions,
        phases=detect_phases(actual_2),
        aggregates=aggregates,
    )


def asymptotic_ratio(errors: np.ndarray, rel_floor: float = 1e-14) -> float:
    """Geometric-mean contraction ratio over the final third of the trace."""
    errors = np.asarray(errors, dtype=float)
    mask = errors > rel_floor * errors[0]
    e = errors[mask]
    if len(e) < 3:
        raise RangeError("too few usable error values for an asymptotic ratio")
    start = 2 * len(e) // 3
    ratios = e[start + 1 :] / e[start:-1]
    return float(np.exp(np.mean(np.log(ratios))))
