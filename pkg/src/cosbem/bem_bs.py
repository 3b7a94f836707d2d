"""Black-Scholes up-and-out put by boundary elements in time.

Time runs backwards from maturity (``tau = T - t``). The undiscounted value
``u`` satisfies the representation

    u(x, tau) = int payoff(y) G(y, 0; x, tau) dy
              + int_0^tau (sigma^2/2) G(B, s; x, tau) q(s) ds

with ``q = du/dy`` at the barrier ``B``, approximated by a constant
``alpha_k`` on each time cell. Pushing ``x`` to ``B`` at the cell midpoints
gives a lower-triangular system. The kernel ``G`` is recovered from its
characteristic function by a cosine series.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cosexp import CosConfig, bs_interval, payoff_coeffs_call, series_inner
from .errors import ArgumentError, QuadratureError, SingularSystemError
from .models.charfun import bs_charfun, bs_density
from .models.params import BarrierKind, BSParams, OptionSpec, Payoff, integrated_rate
from .quad import MATRIX_ABS_TOL, MATRIX_REL_TOL, TimeGrid, integrate_1d
from .results import PriceResult

KERNELS = ("cos", "gaussian")


@dataclass(frozen=True)
class TriangularSystemBS:
    grid: TimeGrid
    matrix: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True)
class BoundaryDensityBS:
    grid: TimeGrid
    alpha: np.ndarray

    def __post_init__(self):
        if len(self.alpha) != self.grid.n_steps:
            raise ArgumentError("alpha length does not match the time grid")


def _check_option(opt: OptionSpec) -> None:
    if opt.payoff is not Payoff.VANILLA_PUT or opt.barrier_kind is not BarrierKind.UP_AND_OUT:
        raise ArgumentError("the Black-Scholes pricer supports the up-and-out put only")


def _kernel_cos(p: BSParams, y, s, tau, x, maturity, cfg: CosConfig) -> float:
    """COS reconstruction of G(y, s; x, tau); zero outside the truncation interval."""
    iv = bs_interval(p, s, tau, x, cfg.L, maturity)
    if iv.collapsed or not iv.contains(y):
        return 0.0
    omega = iv.frequencies(cfg.n_terms)
    cf = bs_charfun(p, omega, s, tau, x, maturity)
    f = 2.0 / iv.width * (np.exp(-1j * omega * iv.a) * cf).real
    return float(series_inner(f, np.cos(omega * (y - iv.a))))


def _kernel(kind: str, p, y, s, tau, x, maturity, cfg) -> float:
    if kind == "cos":
        return _kernel_cos(p, y, s, tau, x, maturity, cfg)
    return float(bs_density(p, y, s, tau, x, maturity))


def _payoff_term(p: BSParams, opt: OptionSpec, x: float, tau: float, cfg: CosConfig) -> float:
    """int (E - e^y)^+ 1{y < B} G(y, 0; x, tau) dy by the cosine series."""
    iv = bs_interval(p, 0.0, tau, x, cfg.L, opt.maturity)
    omega = iv.frequencies(cfg.n_terms)
    cf = bs_charfun(p, omega, 0.0, tau, x, opt.maturity)
    f = 2.0 / iv.width * (np.exp(-1j * omega * iv.a) * cf).real
    v = -payoff_coeffs_call(iv, opt.strike, -math.inf, min(opt.log_barrier, opt.log_strike), cfg.n_terms)
    return float(series_inner(f, v))


def _cell_integral(p, opt, kind, cfg, x, tau, lo, hi, singular, abs_tol, rel_tol) -> float:
    B = opt.log_barrier
    half_var = 0.5 * p.sigma**2
    f = lambda s: half_var * _kernel(kind, p, B, s, tau, x, opt.maturity, cfg)  # noqa: E731
    return integrate_1d(f, lo, hi, abs_tol, rel_tol, singular_end="hi" if singular else None)


def assemble_bs(
    p: BSParams,
    opt: OptionSpec,
    grid: TimeGrid,
    cos_cfg: CosConfig | None = None,
    kernel: str = "cos",
    threads: int = 1,
) -> TriangularSystemBS:
    """Collocation matrix and right-hand side at the time-cell midpoints."""
    _check_option(opt)
    if kernel not in KERNELS:
        raise ArgumentError(f"kernel must be one of {KERNELS}, got {kernel!r}")
    if not math.isclose(grid.maturity, opt.maturity):
        raise ArgumentError("time grid does not span the option maturity")
    cfg = cos_cfg or CosConfig.bs_default()
    nodes, mids = grid.nodes, grid.midpoints
    B = opt.log_barrier

    def row(j: int) -> tuple[np.ndarray, float]:
        out = np.zeros(grid.n_steps)
        for k in range(j + 1):
            lo, hi = nodes[k], min(nodes[k + 1], mids[j])
            try:
                out[k] = _cell_integral(
                    p, opt, kernel, cfg, B, mids[j], lo, hi, k == j, MATRIX_ABS_TOL, MATRIX_REL_TOL
                )
            except QuadratureError as exc:
                raise QuadratureError(
                    "matrix entry failed", exc.error_estimate, j=j + 1, k=k + 1
                ) from exc
        return out, -_payoff_term(p, opt, B, mids[j], cfg)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(row, range(grid.n_steps)))
    matrix = np.array([r for r, _ in rows])
    rhs = np.array([f for _, f in rows])
    return TriangularSystemBS(grid, matrix, rhs)


def solve_bs(sys: TriangularSystemBS) -> BoundaryDensityBS:
    """Forward substitution on the lower-triangular collocation system."""
    A, F = sys.matrix, sys.rhs
    n = len(F)
    alpha = np.zeros(n)
    for j in range(n):
        if A[j, j] == 0.0:
            raise SingularSystemError(f"zero pivot at row {j + 1}")
        alpha[j] = (F[j] - A[j, :j] @ alpha[:j]) / A[j, j]
    return BoundaryDensityBS(sys.grid, alpha)


def price_bs(
    p: BSParams,
    opt: OptionSpec,
    sol: BoundaryDensityBS,
    S: float,
    t: float = 0.0,
    cos_cfg: CosConfig | None = None,
    kernel: str = "cos",
) -> PriceResult:
    """Barrier price V(S, t) from the representation formula."""
    _check_option(opt)
    if not 0.0 <= t < opt.maturity:
        raise ArgumentError(f"evaluation time must lie in [0, T), got {t}")
    if not opt.is_alive(S):
        return PriceResult(0.0, knocked_out=True)
    cfg = cos_cfg or CosConfig.bs_default()
    x, tau = math.log(S), opt.maturity - t
    u = _payoff_term(p, opt, x, tau, cfg)
    nodes = sol.grid.nodes
    for k, a_k in enumerate(sol.alpha):
        lo, hi = nodes[k], min(nodes[k + 1], tau)
        if hi <= lo:
            break
        u += a_k * _cell_integral(p, opt, kernel, cfg, x, tau, lo, hi, False, MATRIX_ABS_TOL, MATRIX_REL_TOL)
    return PriceResult(u * math.exp(-integrated_rate(p, t, opt.maturity)))


def barrier_put_bs(
    p: BSParams,
    opt: OptionSpec,
    n_steps: int,
    spots,
    t: float = 0.0,
    cos_cfg: CosConfig | None = None,
    threads: int = 1,
) -> list[PriceResult]:
    """Assemble, solve and price at every spot."""
    grid = TimeGrid(n_steps, opt.maturity)
    sol = solve_bs(assemble_bs(p, opt, grid, cos_cfg, threads=threads))
    return [price_bs(p, opt, sol, S, t, cos_cfg) for S in np.atleast_1d(spots)]
