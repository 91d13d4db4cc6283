"""Piecewise-constant profiles: the data format for initial conditions and slices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PiecewiseConstant:
    """A piecewise-constant function of x with values in R^n.

    breakpoints: strictly increasing array of shape (k,)
    values:      array of shape (k+1, n); values[j] holds on
                 (breakpoints[j-1], breakpoints[j])
    The function is constant outside the breakpoint range.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if bp.size and np.any(np.diff(bp) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if vals.shape[0] != bp.size + 1:
            raise ValueError("need one more value row than breakpoints")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def __call__(self, x):
        idx = np.searchsorted(self.breakpoints, np.asarray(x, dtype=float), side="right")
        return self.values[idx]

    def total_variation(self) -> float:
        if self.breakpoints.size == 0:
            return 0.0
        jumps = np.diff(self.values, axis=0)
        return float(np.sum(np.linalg.norm(jumps, axis=1)))

    def jumps(self):
        """Yield (x, left_value, right_value) for every nonzero jump."""
        for j, x in enumerate(self.breakpoints):
            lv, rv = self.values[j], self.values[j + 1]
            if np.any(lv != rv):
                yield float(x), lv, rv

    def restricted_l1_norm(self, window) -> float:
        lo, hi = window
        return l1_distance(self, constant(np.zeros(self.n)), (lo, hi))


def constant(value) -> PiecewiseConstant:
    v = np.atleast_1d(np.asarray(value, dtype=float))
    return PiecewiseConstant(np.empty(0), v[None, :].repeat(1, axis=0))


def step(left, right, jump_at: float = 0.0) -> PiecewiseConstant:
    lv = np.atleast_1d(np.asarray(left, dtype=float))
    rv = np.atleast_1d(np.asarray(right, dtype=float))
    return PiecewiseConstant(np.array([jump_at]), np.stack([lv, rv]))


def staircase(breakpoints, values) -> PiecewiseConstant:
    return PiecewiseConstant(np.asarray(breakpoints, dtype=float), np.asarray(values, dtype=float))


def hat(base, peak_delta, center: float = 0.0, half_width: float = 1.0):
    """Continuous hat profile base + peak_delta * max(0, 1 - |x-center|/half_width)."""
    base_v = np.atleast_1d(np.asarray(base, dtype=float))
    delta_v = np.atleast_1d(np.asarray(peak_delta, dtype=float))

    def fn(x):
        s = max(0.0, 1.0 - abs(x - center) / half_width)
        return base_v + s * delta_v

    window = (center - half_width, center + half_width)
    return fn, window


def sample_function(fn, window, tv_estimate: float, delta: float) -> PiecewiseConstant:
    """Midpoint sampling of a piecewise-smooth profile on a uniform grid.

    Midpoint values never increase total variation, and the L1 error is at
    most cell_width * TV / 2, so the grid is chosen to meet the delta budget.
    """
    lo, hi = window
    if hi <= lo:
        raise ValueError("empty sampling window")
    if tv_estimate <= 0.0:
        mid = np.atleast_1d(np.asarray(fn(0.5 * (lo + hi)), dtype=float))
        return constant(mid)
    cells = int(np.ceil((hi - lo) * tv_estimate / (2.0 * delta)))
    cells = max(cells, 2)
    edges = np.linspace(lo, hi, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    inner = np.stack([np.atleast_1d(np.asarray(fn(m), dtype=float)) for m in mids])
    values = np.vstack([inner[:1], inner, inner[-1:]])
    return PiecewiseConstant(edges, values)


def _merged_cells(a: PiecewiseConstant, b: PiecewiseConstant, window):
    lo, hi = window
    cuts = np.concatenate([[lo], a.breakpoints, b.breakpoints, [hi]])
    cuts = np.unique(cuts)
    cuts = cuts[(cuts >= lo) & (cuts <= hi)]
    if cuts.size < 2:
        cuts = np.array([lo, hi])
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    widths = np.diff(cuts)
    return mids, widths


def l1_distance(a: PiecewiseConstant, b: PiecewiseConstant, window) -> float:
    """Exact L1 distance over the window via the merged breakpoint partition."""
    mids, widths = _merged_cells(a, b, window)
    diff = a(mids) - b(mids)
    return float(np.sum(np.linalg.norm(diff, axis=1) * widths))
