"""Heston knock-out options by boundary elements in time and variance.

The undiscounted value solves the representation

    u(x, v, t) = int payoff(y) G~(y, T; x, v, t) dy
                 + s_B int_t^T int (w/2) G(B, w, tau; x, v, t) q(w, tau) dw dtau

with ``q = du/dy`` at the barrier and ``s_B = +1`` for an upper barrier,
``-1`` for a lower one. ``q`` is piecewise constant on (time cell k,
variance cell h) with coefficient ``alpha[k, h]``. Collocating at the cell
midpoints yields a block upper-triangular Toeplitz system, since every entry
depends only on the elapsed time between collocation point and source cell.

The kernel factorizes as ``G = p_v(w | v) p(y - x | w, v)``; ``p_v`` is the
CIR transition density and ``p`` is recovered at a single point from its
conditional characteristic function with a cosine series.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .cosexp import (
    CosConfig,
    CosInterval,
    heston_interval,
    payoff_coeffs_call,
    payoff_coeffs_call_dx,
    payoff_coeffs_cash,
    payoff_coeffs_cash_dx,
    series_inner,
)
from .errors import ArgumentError, IllConditionedError, NumericalInstabilityError
from .models.charfun import (
    _PhiTerms,
    heston_logprice_charfun,
    log_cond_charfun,
    phi_argument,
    variance_density,
    variance_moments,
)
from .models.params import BarrierKind, HestonParams, OptionSpec, Payoff
from .quad import BlockTimeRule, TimeGrid, VarianceGrid, block_time_rule, composite_gauss
from .results import PriceResult

MAX_CONDITION = 1e12
NEAR_BARRIER_LOG_DISTANCE = 0.02


class NearBarrierWarning(UserWarning):
    """Spot is close to the barrier; finer time grids are advisable."""


@dataclass(frozen=True)
class HestonQuadConfig:
    """Quadrature resolution for the boundary integrals.

    Time: the first block uses ``first_nodes`` points after a square-root
    substitution, the next ``n_near - 1`` blocks ``near_nodes`` each, later
    blocks share interpolatory panels of ``panel_nodes`` points that grow
    by ``panel_ratio``. Variance: Gauss rules on segments cut at the cell
    edges and at multiples of the standard deviation of ``p_v``, which is
    treated as zero beyond ``sd_span`` standard deviations.
    """

    first_nodes: int = 24
    near_nodes: int = 10
    n_near: int = 4
    panel_nodes: int = 10
    panel_ratio: float = 2.0
    sd_span: float = 14.0
    w_nodes: int = 6


@dataclass(frozen=True)
class HestonGrids:
    tgrid: TimeGrid
    vgrid: VarianceGrid


@dataclass(frozen=True)
class BlockToeplitzSystem:
    """Distinct blocks ``blocks[l]`` (lag l) and right-hand sides ``rhs[j]``.

    Block row ``j`` reads ``sum_l blocks[l] @ alpha[j + l] = rhs[j]``.
    """

    grids: HestonGrids
    blocks: np.ndarray
    rhs: np.ndarray

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Materialized full matrix and stacked right-hand side."""
        nt, nv = self.rhs.shape
        full = np.zeros((nt * nv, nt * nv))
        for j in range(nt):
            for ell in range(nt - j):
                k = j + ell
                full[j * nv:(j + 1) * nv, k * nv:(k + 1) * nv] = self.blocks[ell]
        return full, self.rhs.ravel()


@dataclass(frozen=True)
class BoundaryDensityH:
    grids: HestonGrids
    alpha: np.ndarray
    condition: float = field(default=float("nan"))

    def __post_init__(self):
        shape = (self.grids.tgrid.n_steps, self.grids.vgrid.n_cells)
        if self.alpha.shape != shape:
            raise ArgumentError(f"alpha shape {self.alpha.shape} does not match grids {shape}")


def barrier_sign(opt: OptionSpec) -> float:
    return 1.0 if opt.barrier_kind is BarrierKind.UP_AND_OUT else -1.0


def _variance_rule(p: HestonParams, vgrid: VarianceGrid, dt: float, v: float, qcfg: HestonQuadConfig):
    """Gauss nodes in w covering the bulk of p_v(. , dt | v) inside [0, v_max]."""
    mean, var = variance_moments(p, dt, v)
    sd = math.sqrt(var)
    span = qcfg.sd_span
    lo, hi = max(0.0, mean - span * sd), min(vgrid.v_max, mean + span * sd)
    if not hi > lo:
        return None
    marks = mean + sd * np.array([-8.0, -5.0, -3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0])
    edges = vgrid.nodes
    breaks = np.unique(np.concatenate([[lo, hi], marks, edges]))
    breaks = breaks[(breaks >= lo) & (breaks <= hi)]
    seg_len = np.diff(breaks)
    keep = seg_len > 1e-15 * max(1.0, vgrid.v_max)
    counts = np.where(seg_len <= 0.5 * sd, 3, np.where(seg_len <= sd, 4, qcfg.w_nodes))
    w, wts, seg = composite_gauss(breaks, counts)
    seg_keep = keep[seg]
    w, wts, seg = w[seg_keep], wts[seg_keep], seg[seg_keep]
    centers = 0.5 * (breaks[seg] + breaks[seg + 1])
    cell = np.minimum((centers / vgrid.dv).astype(int), vgrid.n_cells - 1)
    return w, wts, cell


def cell_kernel(
    p: HestonParams,
    vgrid: VarianceGrid,
    v: float,
    dt: float,
    z: float,
    cos_cfg: CosConfig,
    qcfg: HestonQuadConfig,
    derivative: bool = False,
) -> np.ndarray:
    """int over each variance cell of (w/2) p_v(w, dt | v) p(z, dt | w, v) dw.

    ``p`` is the conditional log-price increment density recovered by a
    cosine series on the cumulant interval of ``(dt, v)``; it is taken as 0
    when ``z`` falls outside that interval. With ``derivative=True`` the
    density is replaced by ``-dp/dz``, which is the x-derivative of
    ``p(B - x)``.
    """
    out = np.zeros(vgrid.n_cells)
    iv = heston_interval(p, dt, v, 0.0, cos_cfg.L)
    if iv.collapsed or not iv.contains(z):
        return out
    rule = _variance_rule(p, vgrid, dt, v, qcfg)
    if rule is None:
        return out
    w, wts, cell = rule
    pv = variance_density(p, w, dt, v)
    if not np.all(np.isfinite(pv)):
        raise NumericalInstabilityError("variance density not finite", dt=dt, v=v)
    mass = 0.5 * w * pv * wts
    live = mass > 1e-300
    if not np.any(live):
        return out
    w, mass, cell = w[live], mass[live], cell[live]
    omega = iv.frequencies(cos_cfg.n_terms)
    terms = _PhiTerms(p, phi_argument(p, omega), dt)
    with np.errstate(all="ignore"):
        phat = np.exp(log_cond_charfun(p, omega, v, w, dt, terms) - 1j * omega * iv.a)
    if not np.all(np.isfinite(phat)):
        raise NumericalInstabilityError("conditional charfun overflow", dt=dt, v=v)
    theta = omega * (z - iv.a)
    basis = np.sin(theta) * omega if derivative else np.cos(theta)
    basis = basis * (2.0 / iv.width)
    basis[0] *= 0.5
    dens = phat.real @ basis
    np.add.at(out, cell, mass * dens)
    return out


def _map_nodes(fn, nodes, threads: int) -> np.ndarray:
    if threads <= 1:
        return np.array([fn(t) for t in nodes])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(fn, nodes)))


def assembly_time_rule(tgrid: TimeGrid, qcfg: HestonQuadConfig) -> BlockTimeRule:
    """Elapsed-time blocks [0, dt/2], [dt(l - 1/2), dt(l + 1/2)] for lags l."""
    dt = tgrid.dt
    edges = np.concatenate([[0.0], (np.arange(tgrid.n_steps) + 0.5) * dt])
    return block_time_rule(
        edges, qcfg.first_nodes, qcfg.near_nodes, qcfg.n_near, qcfg.panel_nodes, qcfg.panel_ratio
    )


def assemble_blocks(
    p: HestonParams,
    grids: HestonGrids,
    cos_cfg: CosConfig | None = None,
    qcfg: HestonQuadConfig | None = None,
    threads: int = 1,
) -> np.ndarray:
    """All lag blocks A^(l), shape (N_t, N_v, N_v), indexed [l, i, h]."""
    cos_cfg = cos_cfg or CosConfig.heston_default()
    qcfg = qcfg or HestonQuadConfig()
    rule = assembly_time_rule(grids.tgrid, qcfg)
    mids = grids.vgrid.midpoints

    def at_node(elapsed: float) -> np.ndarray:
        return np.array(
            [cell_kernel(p, grids.vgrid, vi, elapsed, 0.0, cos_cfg, qcfg) for vi in mids]
        )

    samples = _map_nodes(at_node, rule.nodes, threads)
    return rule.block_integrals(samples)


def assemble_block(
    p: HestonParams,
    grids: HestonGrids,
    ell: int,
    cos_cfg: CosConfig | None = None,
    qcfg: HestonQuadConfig | None = None,
) -> np.ndarray:
    """Single lag block A^(ell) with its own Gauss rule in elapsed time."""
    n_t = grids.tgrid.n_steps
    if not 0 <= ell < n_t:
        raise ArgumentError(f"lag must lie in [0, {n_t - 1}], got {ell}")
    cos_cfg = cos_cfg or CosConfig.heston_default()
    qcfg = qcfg or HestonQuadConfig()
    dt = grids.tgrid.dt
    lo, hi = (0.0, 0.5 * dt) if ell == 0 else ((ell - 0.5) * dt, (ell + 0.5) * dt)
    n = qcfg.first_nodes if ell == 0 else qcfg.near_nodes
    rule = block_time_rule([lo, hi], first_nodes=n, sqrt_first=ell == 0)
    mids = grids.vgrid.midpoints
    samples = np.array(
        [[cell_kernel(p, grids.vgrid, vi, t, 0.0, cos_cfg, qcfg) for vi in mids] for t in rule.nodes]
    )
    return rule.block_integrals(samples)[0]


def _payoff_window(opt: OptionSpec) -> tuple[float, float]:
    """Log-price range where the payoff is non-zero and the barrier is not crossed."""
    lo, hi = -math.inf, math.inf
    if opt.payoff is Payoff.VANILLA_PUT:
        hi = opt.log_strike
    else:
        lo = opt.log_strike
    if opt.barrier_kind is BarrierKind.UP_AND_OUT:
        hi = min(hi, opt.log_barrier)
    else:
        lo = max(lo, opt.log_barrier)
    return lo, hi


def payoff_coefficients(opt: OptionSpec, iv: CosInterval, n_terms: int, derivative: bool = False) -> np.ndarray:
    """V_n of the clipped payoff (or of its x-derivative under an interval shift)."""
    lo, hi = _payoff_window(opt)
    if opt.payoff is Payoff.CASH_OR_NOTHING_CALL:
        fn = payoff_coeffs_cash_dx if derivative else payoff_coeffs_cash
        return fn(iv, lo, hi, n_terms)
    fn = payoff_coeffs_call_dx if derivative else payoff_coeffs_call
    v = fn(iv, opt.strike, lo, hi, n_terms)
    return -v if opt.payoff is Payoff.VANILLA_PUT else v


def payoff_term(
    p: HestonParams, opt: OptionSpec, x: float, v: float, dt: float, cos_cfg: CosConfig,
    derivative: bool = False,
) -> float:
    """int payoff(y) 1{y live} G~(y, dt; x, v) dy from the log-price characteristic function."""
    iv = heston_interval(p, dt, v, x, cos_cfg.L)
    if iv.collapsed:
        return 0.0
    omega = iv.frequencies(cos_cfg.n_terms)
    cf = heston_logprice_charfun(p, omega, x, v, dt)
    coeffs = 2.0 / iv.width * (cf * np.exp(-1j * omega * iv.a)).real
    return float(series_inner(coeffs, payoff_coefficients(opt, iv, cos_cfg.n_terms, derivative)))


def assemble_rhs(
    p: HestonParams, opt: OptionSpec, grids: HestonGrids, cos_cfg: CosConfig | None = None
) -> np.ndarray:
    """Payoff terms at the barrier for every (time midpoint, variance midpoint)."""
    cos_cfg = cos_cfg or CosConfig.heston_default()
    B = opt.log_barrier
    to_go = opt.maturity - grids.tgrid.midpoints
    return np.array(
        [[payoff_term(p, opt, B, vi, tau, cos_cfg) for vi in grids.vgrid.midpoints] for tau in to_go]
    )


def assemble_heston(
    p: HestonParams,
    opt: OptionSpec,
    grids: HestonGrids,
    cos_cfg: CosConfig | None = None,
    qcfg: HestonQuadConfig | None = None,
    threads: int = 1,
) -> BlockToeplitzSystem:
    """Block system whose solution is the barrier derivative du/dy."""
    if not math.isclose(grids.tgrid.maturity, opt.maturity):
        raise ArgumentError("time grid does not span the option maturity")
    blocks = assemble_blocks(p, grids, cos_cfg, qcfg, threads)
    rhs = -barrier_sign(opt) * assemble_rhs(p, opt, grids, cos_cfg)
    return BlockToeplitzSystem(grids, blocks, rhs)


def solve_blocks(sys: BlockToeplitzSystem) -> BoundaryDensityH:
    """Block back-substitution reusing one LU factorization of the diagonal block."""
    a0 = sys.blocks[0]
    cond = float(np.linalg.cond(a0))
    if not cond < MAX_CONDITION:
        raise IllConditionedError(f"diagonal block condition number {cond:.3e} exceeds {MAX_CONDITION:g}")
    lu = linalg.lu_factor(a0)
    n_t = sys.rhs.shape[0]
    alpha = np.zeros_like(sys.rhs)
    for j in range(n_t - 1, -1, -1):
        r = sys.rhs[j].copy()
        for ell in range(1, n_t - j):
            r -= sys.blocks[ell] @ alpha[j + ell]
        alpha[j] = linalg.lu_solve(lu, r)
    return BoundaryDensityH(sys.grids, alpha, cond)


def postpro_time_rule(tgrid: TimeGrid, qcfg: HestonQuadConfig) -> BlockTimeRule:
    """Elapsed-time blocks [dt(k-1), dt k] seen from t = 0."""
    return block_time_rule(
        tgrid.nodes, qcfg.first_nodes, qcfg.near_nodes, qcfg.n_near, qcfg.panel_nodes, qcfg.panel_ratio
    )


def _boundary_term(p, opt, sol, x, v, cos_cfg, qcfg, derivative, threads) -> float:
    tgrid, vgrid = sol.grids.tgrid, sol.grids.vgrid
    rule = postpro_time_rule(tgrid, qcfg)
    z = opt.log_barrier - x

    def at_node(elapsed: float) -> np.ndarray:
        return cell_kernel(p, vgrid, v, elapsed, z, cos_cfg, qcfg, derivative)

    cells = rule.block_integrals(_map_nodes(at_node, rule.nodes, threads))
    return float(np.sum(cells * sol.alpha))


def _check_spot(opt: OptionSpec, S: float, v: float) -> tuple[bool, tuple[str, ...]]:
    if not v > 0:
        raise ArgumentError(f"variance must be positive, got {v}")
    if not S > 0:
        raise ArgumentError(f"spot must be positive, got {S}")
    if not opt.is_alive(S):
        return False, ()
    notes = ()
    if abs(math.log(S) - opt.log_barrier) < NEAR_BARRIER_LOG_DISTANCE:
        msg = (
            f"spot {S:g} lies within {NEAR_BARRIER_LOG_DISTANCE} in log-price of the barrier; "
            "refine the time grid"
        )
        warnings.warn(msg, NearBarrierWarning, stacklevel=3)
        notes = (msg,)
    return True, notes


def price_heston(
    p: HestonParams,
    opt: OptionSpec,
    sol: BoundaryDensityH,
    S: float,
    v: float,
    cos_cfg: CosConfig | None = None,
    qcfg: HestonQuadConfig | None = None,
    threads: int = 1,
) -> PriceResult:
    """Barrier price V(S, v, 0) = exp(-rT) u(log S, v, 0)."""
    alive, notes = _check_spot(opt, S, v)
    if not alive:
        return PriceResult(0.0, 0.0, knocked_out=True)
    cos_cfg = cos_cfg or CosConfig.heston_default()
    qcfg = qcfg or HestonQuadConfig()
    x = math.log(S)
    u = payoff_term(p, opt, x, v, opt.maturity, cos_cfg)
    u += barrier_sign(opt) * _boundary_term(p, opt, sol, x, v, cos_cfg, qcfg, False, threads)
    return PriceResult(math.exp(-p.r * opt.maturity) * u, warnings=notes)


def delta_heston(
    p: HestonParams,
    opt: OptionSpec,
    sol: BoundaryDensityH,
    S: float,
    v: float,
    cos_cfg: CosConfig | None = None,
    qcfg: HestonQuadConfig | None = None,
    threads: int = 1,
) -> float:
    """dV/dS at t = 0 from the differentiated representation formula."""
    alive, _ = _check_spot(opt, S, v)
    if not alive:
        return 0.0
    cos_cfg = cos_cfg or CosConfig.heston_default()
    qcfg = qcfg or HestonQuadConfig()
    x = math.log(S)
    du = payoff_term(p, opt, x, v, opt.maturity, cos_cfg, derivative=True)
    du += barrier_sign(opt) * _boundary_term(p, opt, sol, x, v, cos_cfg, qcfg, True, threads)
    return math.exp(-p.r * opt.maturity) * du / S


def solve_heston(
    p: HestonParams,
    opt: OptionSpec,
    n_dt: int,
    n_dv: int,
    v_max: float,
    cos_cfg: CosConfig | None = None,
    qcfg: HestonQuadConfig | None = None,
    threads: int = 1,
) -> BoundaryDensityH:
    grids = HestonGrids(TimeGrid(n_dt, opt.maturity), VarianceGrid(v_max, n_dv))
    return solve_blocks(assemble_heston(p, opt, grids, cos_cfg, qcfg, threads))
