"""Grids and deterministic quadrature rules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate

from .errors import ArgumentError, QuadratureError

MATRIX_ABS_TOL = 1e-10
MATRIX_REL_TOL = 1e-8
POSTPRO_ABS_TOL = 1e-8
POSTPRO_REL_TOL = 1e-6


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, maturity] into ``n_steps`` cells."""

    n_steps: int
    maturity: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ArgumentError(f"n_steps must be >= 1, got {self.n_steps}")
        if not self.maturity > 0:
            raise ArgumentError(f"maturity must be positive, got {self.maturity}")

    @property
    def dt(self) -> float:
        return self.maturity / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_steps) + 0.5) * self.dt


@dataclass(frozen=True)
class VarianceGrid:
    """Uniform partition of the truncated variance domain [0, v_max]."""

    v_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 1:
            raise ArgumentError(f"n_cells must be >= 1, got {self.n_cells}")
        if not self.v_max > 0:
            raise ArgumentError(f"v_max must be positive, got {self.v_max}")

    @classmethod
    def default(cls, v_spot: float, vbar: float, n_cells: int) -> "VarianceGrid":
        return cls(2.0 * max(v_spot, vbar), n_cells)

    @property
    def dv(self) -> float:
        return self.v_max / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.dv

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dv


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_on(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss_legendre(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def integrate_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    abs_tol: float = MATRIX_ABS_TOL,
    rel_tol: float = MATRIX_REL_TOL,
    singular_end: str | None = None,
    limit: int = 200,
) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over [lo, hi].

    ``singular_end`` names an endpoint carrying an inverse-square-root
    singularity; it is removed with ``s = hi - u**2`` (or ``lo + u**2``).
    """
    if lo > hi:
        raise ArgumentError(f"integrate_1d needs lo <= hi, got ({lo}, {hi})")
    if lo == hi:
        return 0.0
    if singular_end == "hi":
        g = lambda u: 2.0 * u * f(hi - u * u)  # noqa: E731
        a, b = 0.0, math.sqrt(hi - lo)
    elif singular_end == "lo":
        g = lambda u: 2.0 * u * f(lo + u * u)  # noqa: E731
        a, b = 0.0, math.sqrt(hi - lo)
    elif singular_end is None:
        g, a, b = f, lo, hi
    else:
        raise ArgumentError(f"singular_end must be 'lo', 'hi' or None, got {singular_end!r}")
    val, err, info = integrate.quad(
        g, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=True
    )[:3]
    if err > max(abs_tol, rel_tol * abs(val)) and err > 10 * np.finfo(float).eps * abs(val):
        raise QuadratureError("adaptive quadrature did not converge", err, lo=lo, hi=hi)
    return float(val)


def _tensor(f, w_lo, w_hi, s_lo, s_hi, n):
    wx, ww = gauss_on(w_lo, w_hi, n)
    sx, sw = gauss_on(s_lo, s_hi, n)
    W, S = np.meshgrid(wx, sx, indexing="ij")
    vals = np.asarray(f(W, S), dtype=float)
    return float(ww @ vals @ sw)


def integrate_cell_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    w_lo: float,
    w_hi: float,
    s_lo: float,
    s_hi: float,
    tol: float = MATRIX_ABS_TOL,
    order: int = 8,
    max_depth: int = 10,
) -> float:
    """Adaptive tensor Gauss-Legendre integral of ``f(w, s)`` over a rectangle.

    A cell is accepted when its single-rule estimate agrees with the sum over
    its four quarters; otherwise each quarter is refined with a quarter of
    the tolerance. ``f`` receives broadcast 2-D arrays.
    """
    if w_lo > w_hi or s_lo > s_hi:
        raise ArgumentError("integrate_cell_2d needs ordered bounds")
    if w_lo == w_hi or s_lo == s_hi:
        return 0.0

    def quarters(wl, wh, sl, sh):
        wm, sm = 0.5 * (wl + wh), 0.5 * (sl + sh)
        return [(wl, wm, sl, sm), (wl, wm, sm, sh), (wm, wh, sl, sm), (wm, wh, sm, sh)]

    def recurse(box, whole, tol_box, depth):
        parts = [_tensor(f, *q, order) for q in quarters(*box)]
        fine = math.fsum(parts)
        if abs(fine - whole) <= tol_box:
            return fine, abs(fine - whole)
        if depth >= max_depth:
            raise QuadratureError("2-D refinement exhausted", abs(fine - whole), box=box)
        total, err = 0.0, 0.0
        for q, val in zip(quarters(*box), parts):
            v, e = recurse(q, val, tol_box / 4.0, depth + 1)
            total += v
            err += e
        return total, err

    box = (w_lo, w_hi, s_lo, s_hi)
    value, _ = recurse(box, _tensor(f, *box, order), tol, 0)
    return value


def composite_gauss(breaks, n_nodes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss rule on consecutive segments of ``breaks``.

    ``n_nodes`` is a scalar or one count per segment. Returns nodes, weights
    and the segment index of each node.
    """
    breaks = np.asarray(breaks, dtype=float)
    n_seg = len(breaks) - 1
    counts = np.broadcast_to(np.asarray(n_nodes, dtype=int), (n_seg,))
    xs, ws, idx = [], [], []
    for k in range(n_seg):
        x, w = gauss_on(breaks[k], breaks[k + 1], int(counts[k]))
        xs.append(x)
        ws.append(w)
        idx.append(np.full(len(x), k))
    if not xs:
        return np.empty(0), np.empty(0), np.empty(0, dtype=int)
    return np.concatenate(xs), np.concatenate(ws), np.concatenate(idx)


@dataclass(frozen=True)
class BlockTimeRule:
    """Shared quadrature nodes for integrals over consecutive time blocks.

    ``block_integrals(values)`` maps kernel samples at ``nodes`` (node axis
    first) to one integral per block via the weight matrix ``weights``.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def block_integrals(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, values, axes=(1, 0))


def _panel_weights(lo, hi, sub_edges, n):
    # interpolate on n Gauss points of [lo, hi], integrate exactly per sub-interval
    x, _ = gauss_legendre(n)
    vinv = np.linalg.inv(legendre.legvander(x, n - 1))
    half = 0.5 * (hi - lo)
    ref = (np.asarray(sub_edges) - lo) / half - 1.0
    moments = np.empty((len(sub_edges) - 1, n))
    for deg in range(n):
        c = np.zeros(n)
        c[deg] = 1.0
        anti = legendre.legval(ref, legendre.legint(c))
        moments[:, deg] = np.diff(anti)
    return lo + half * (x + 1.0), half * moments @ vinv


def block_time_rule(
    edges,
    first_nodes: int = 24,
    near_nodes: int = 10,
    n_near: int = 4,
    panel_nodes: int = 10,
    panel_ratio: float = 2.0,
    sqrt_first: bool = True,
) -> BlockTimeRule:
    """Build a :class:`BlockTimeRule` for blocks ``[edges[k], edges[k+1]]``.

    The first block gets a square-root substitution at its left end (kernels
    behave like ``t**-0.5`` there), the next ``n_near - 1`` blocks their own
    Gauss rule, and later blocks share interpolatory panels whose length
    grows geometrically, since the kernel flattens with elapsed time.
    """
    edges = np.asarray(edges, dtype=float)
    n_blocks = len(edges) - 1
    if n_blocks < 1 or np.any(np.diff(edges) <= 0):
        raise ArgumentError("block edges must be strictly increasing")
    node_parts, weight_parts = [], []

    def add(rows, nodes, w):
        full = np.zeros((n_blocks, len(nodes)))
        full[rows, :] = w
        node_parts.append(nodes)
        weight_parts.append(full)

    lo, hi = edges[0], edges[1]
    if sqrt_first:
        u, wu = gauss_on(0.0, 1.0, first_nodes)
        span = hi - lo
        add(slice(0, 1), lo + span * u * u, 2.0 * span * u * wu)
    else:
        x, w = gauss_on(lo, hi, first_nodes)
        add(slice(0, 1), x, w)
    k = 1
    while k < min(n_near, n_blocks):
        x, w = gauss_on(edges[k], edges[k + 1], near_nodes)
        add(slice(k, k + 1), x, w)
        k += 1
    while k < n_blocks:
        stop = max(k + 1, int(math.ceil(k * panel_ratio)))
        stop = min(stop, n_blocks)
        if stop - k < panel_nodes // 2:
            # short panel: per-block rules are as cheap and exact in degree
            m = max(4, math.ceil(panel_nodes / (stop - k)))
            for kk in range(k, stop):
                x, w = gauss_on(edges[kk], edges[kk + 1], m)
                add(slice(kk, kk + 1), x, w)
        else:
            x, w = _panel_weights(edges[k], edges[stop], edges[k : stop + 1], panel_nodes)
            add(slice(k, stop), x, w)
        k = stop
    return BlockTimeRule(np.concatenate(node_parts), np.concatenate(weight_parts, axis=1))
