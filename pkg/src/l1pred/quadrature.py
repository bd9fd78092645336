"""Quadrature rules and numerical budgets, with scalar search helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ModelError

__all__ = [
    "QuadSpec",
    "McSpec",
    "SearchSpec",
    "cosine_rule",
    "panel_rule",
    "law_edges",
    "find_crossings",
    "golden_section",
]


@dataclass(frozen=True)
class QuadSpec:
    """Budget for nested radial quadrature.

    Parameters
    ----------
    nodes : int
        Approximate Gauss-Legendre node count per radial axis; nodes are shared
        among the panels of that axis with at least 16 per panel.
    truncation_mass : float
        Probability mass discarded beyond the last panel of an unbounded axis.
    check_convergence : bool
        Re-evaluate with doubled nodes and require ``|dR| < tol``.
    tol : float
        Convergence tolerance for the doubling check.
    """

    nodes: int = 256
    truncation_mass: float = 1e-10
    check_convergence: bool = False
    tol: float = 1e-7

    def __post_init__(self):
        if self.nodes < 8:
            raise ModelError(f"quadrature needs at least 8 nodes, got {self.nodes}")
        if not 0.0 < self.truncation_mass < 0.5:
            raise ModelError(f"truncation mass must lie in (0, 0.5), got {self.truncation_mass}")

    def doubled(self) -> "QuadSpec":
        return QuadSpec(2 * self.nodes, self.truncation_mass, False, self.tol)


@dataclass(frozen=True)
class McSpec:
    """Monte-Carlo budget: outer draws and RNG seed. ``batch`` only bounds memory."""

    n: int = 100_000
    seed: int = 20240601
    batch: int = 50_000

    def __post_init__(self):
        if self.n < 1 or self.batch < 1:
            raise ModelError("Monte-Carlo sizes must be positive")


@dataclass(frozen=True)
class SearchSpec:
    """Scale search protocol: coarse grid on ``[c_min, c_max]``, then golden section."""

    c_min: float = 1.0
    c_max: float = 4.0
    step: float = 0.01
    tol: float = 1e-4

    def __post_init__(self):
        if not (0 < self.c_min < self.c_max) or self.step <= 0 or self.tol <= 0:
            raise ModelError("search needs 0 < c_min < c_max and positive step/tol")

    def grid(self) -> np.ndarray:
        n = int(round((self.c_max - self.c_min) / self.step))
        return self.c_min + self.step * np.arange(n + 1)


@lru_cache(maxsize=64)
def _cosine_reference(m: int) -> tuple[np.ndarray, np.ndarray]:
    u, w = np.polynomial.legendre.leggauss(m)
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    x = 0.5 * (1.0 - np.cos(math.pi * u))
    jac = 0.5 * math.pi * np.sin(math.pi * u)
    return x, w * jac


def cosine_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    """``m``-point rule on [0, 1] clustered at both ends.

    Gauss-Legendre in ``u`` composed with ``x = (1 - cos(pi u)) / 2``. The
    map's vanishing derivative at the ends absorbs square-root endpoint
    behaviour, which arises wherever a cross-angle argument reaches +-1.
    """
    x, w = _cosine_reference(int(m))
    return x.copy(), w.copy()


def panel_rule(edges: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for panels between consecutive ``edges``.

    ``edges`` has shape ``(..., K)`` and must be sorted along the last axis;
    repeated edges give empty panels. Returns arrays of shape
    ``(..., (K - 1) * m)``.
    """
    edges = np.asarray(edges, dtype=float)
    x0, w0 = _cosine_reference(int(m))
    a = edges[..., :-1, None]
    width = np.diff(edges, axis=-1)[..., None]
    nodes = a + width * x0
    weights = width * w0
    shape = edges.shape[:-1] + ((edges.shape[-1] - 1) * x0.size,)
    return nodes.reshape(shape), np.broadcast_to(weights, nodes.shape).reshape(shape)


def law_edges(law, truncation_mass: float) -> np.ndarray:
    """Panel edges on [0, R] for a radial law.

    Bounded laws get a single panel. Unbounded laws are cut at the median,
    the 0.9 quantile and upper-tail quantiles ``10^-2, 10^-3, ...`` down to
    ``truncation_mass``, which also fixes the truncation radius.
    """
    if math.isfinite(law.upper):
        return np.array([0.0, law.upper])
    cuts = [0.0, law.quantile(0.5), law.quantile(0.9)]
    tail = 1e-2
    while tail > truncation_mass * 1.0001:
        cuts.append(law.upper_quantile(tail))
        tail /= 10.0
    cuts.append(law.upper_quantile(truncation_mass))
    return np.unique(np.asarray(cuts, dtype=float))


def find_crossings(funcs: list[Callable[[np.ndarray], np.ndarray]], scan: np.ndarray,
                   iters: int = 55) -> np.ndarray:
    """Sign changes of each ``f`` along the last axis of ``scan``, refined by bisection.

    ``scan`` has shape ``(rows, S)`` and is sorted along axis 1. Each function
    maps an array of that shape (or ``(rows, k)``) to values of the same
    shape, row ``i`` being the function for row ``i``. Returns a
    ``(rows, K)`` array of roots sorted per row, padded with ``nan``.
    """
    scan = np.asarray(scan, dtype=float)
    rows = scan.shape[0]
    found: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for f in funcs:
        vals = f(scan)
        with np.errstate(invalid="ignore"):
            s = np.sign(vals)
        z_r, z_c = np.nonzero(s == 0)
        if z_r.size:
            found.append((z_r, scan[z_r, z_c], None))
        # an exact zero may be a touch followed by a real crossing in the next
        # interval, so it counts as positive; duplicates are dropped below
        s = np.where(s == 0, 1.0, s)
        change = s[:, :-1] * s[:, 1:] < 0
        r_idx, c_idx = np.nonzero(change)
        if r_idx.size == 0:
            continue
        lo = scan[r_idx, c_idx]
        hi = scan[r_idx, c_idx + 1]
        s_lo = s[r_idx, c_idx]
        evaluate = _RowEvaluator(f, r_idx, rows)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            same = np.sign(evaluate(mid)) == s_lo
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        found.append((r_idx, 0.5 * (lo + hi), None))
    if not found:
        return np.full((rows, 0), np.nan)
    r_all = np.concatenate([f[0] for f in found])
    x_all = np.concatenate([f[1] for f in found])
    order = np.lexsort((x_all, r_all))
    r_all, x_all = r_all[order], x_all[order]
    dup = np.zeros(r_all.size, dtype=bool)
    dup[1:] = (r_all[1:] == r_all[:-1]) & (
        np.abs(x_all[1:] - x_all[:-1]) <= 1e-13 * np.maximum(1.0, np.abs(x_all[1:])))
    r_all, x_all = r_all[~dup], x_all[~dup]
    counts = np.bincount(r_all, minlength=rows)
    out = np.full((rows, int(counts.max())), np.nan)
    order = np.lexsort((x_all, r_all))
    r_sorted, x_sorted = r_all[order], x_all[order]
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    pos = np.arange(r_sorted.size) - starts[r_sorted]
    out[r_sorted, pos] = x_sorted
    return out


class _RowEvaluator:
    """Evaluate a row-wise function at scattered (row, x) pairs."""

    def __init__(self, f, r_idx, rows):
        # one column per occurrence keeps the row alignment
        k = np.bincount(r_idx, minlength=rows)
        starts = np.concatenate([[0], np.cumsum(k)[:-1]])
        order = np.argsort(r_idx, kind="stable")
        self.pos = np.empty_like(r_idx)
        self.pos[order] = np.arange(r_idx.size) - starts[r_idx[order]]
        self.r_idx = r_idx
        self.shape = (rows, int(k.max()))
        self.f = f

    def __call__(self, x):
        grid = np.ones(self.shape)
        grid[self.r_idx, self.pos] = x
        return self.f(grid)[self.r_idx, self.pos]


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-4,
                   max_iter: int = 200) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[a, b]`` to bracket width ``tol``.

    Returns ``(x_min, f(x_min))``.
    """
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = f(x2)
    if f1 <= f2:
        return x1, f1
    return x2, f2
