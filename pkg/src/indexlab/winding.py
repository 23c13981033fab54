"""Winding numbers of nonvanishing complex curves.

Four flavours are provided: one period of a periodic function, the boundary
of the triangle symbol, the mean winding of an almost periodic function and
the pair of periodic windings of an asymptotically periodic symbol.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import CornerMismatch, NotClosed, RefinementExhausted, ZeroCrossing

ZERO_TOL = 1e-8
MAX_DEPTH = 30
STEP_BOUND = 0.5 * np.pi
CLOSE_TOL = 1e-9
CORNER_TOL = 1e-3
DEFAULT_CUTOFF = 60.0
DEFAULT_T_SCHEDULE = (125.0, 250.0, 500.0, 1000.0)


@dataclass(frozen=True)
class SampledCurve:
    params: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.params, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if p.shape != v.shape or p.ndim != 1:
            raise ValueError("params and values must be 1-d arrays of equal length")
        if p.size > 1 and not (np.all(np.diff(p) > 0) or np.all(np.diff(p) < 0)):
            raise ValueError("params must be strictly monotone")
        small = np.abs(v) < ZERO_TOL
        if np.any(small):
            raise ZeroCrossing(f"curve value below {ZERO_TOL} at t = {p[small][0]}")
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, f: Callable, params) -> "SampledCurve":
        params = np.asarray(params, dtype=float)
        return cls(params, np.asarray(f(params), dtype=complex))


@dataclass(frozen=True)
class WindingEstimate:
    value: float
    uncertainty: float
    integer_rounded: Optional[int] = None

    def __post_init__(self):
        if self.integer_rounded is not None and abs(self.value - self.integer_rounded) > 0.1:
            raise ValueError("integer_rounded is more than 0.1 away from value")

    @classmethod
    def rounded(cls, value: float, uncertainty: float = 0.0) -> "WindingEstimate":
        k = int(round(value))
        if abs(value - k) <= 0.1:
            return cls(float(value), float(max(uncertainty, abs(value - k))), k)
        return cls(float(value), float(max(uncertainty, abs(value - k))), None)


def _check(v, t):
    if abs(v) < ZERO_TOL:
        raise ZeroCrossing(f"|f| = {abs(v):.3g} < {ZERO_TOL} at t = {t}")


def _step(t0, v0, t1, v1, refiner, depth, max_depth):
    d = float(np.angle(v1 / v0))
    if abs(d) < STEP_BOUND:
        return d
    if refiner is None:
        raise RefinementExhausted(f"phase step {d:.3g} between {t0} and {t1} and no refiner")
    if depth >= max_depth:
        raise RefinementExhausted(f"phase step still {d:.3g} at depth {max_depth} near t = {t0}")
    tm = 0.5 * (t0 + t1)
    vm = complex(np.asarray(refiner(np.array([tm])), dtype=complex).ravel()[0])
    _check(vm, tm)
    return (_step(t0, v0, tm, vm, refiner, depth + 1, max_depth)
            + _step(tm, vm, t1, v1, refiner, depth + 1, max_depth))


def _increments(curve: SampledCurve, refiner, max_depth):
    v = curve.values
    d = np.angle(v[1:] / v[:-1])
    bad = np.nonzero(np.abs(d) >= STEP_BOUND)[0]
    p = curve.params
    for i in bad:
        d[i] = _step(p[i], v[i], p[i + 1], v[i + 1], refiner, 0, max_depth)
    return d


def unwind(curve: SampledCurve, refiner: Optional[Callable] = None,
           max_depth: int = MAX_DEPTH) -> float:
    """Total continuous phase change along the curve, in radians.

    Steps with |d arg| >= pi/2 are bisected through ``refiner`` (a vectorized
    callable param -> value) until every sub-step is below pi/2.
    """
    if curve.params.size < 2:
        return 0.0
    return float(np.sum(_increments(curve, refiner, max_depth)))


def unwrapped_phase(curve: SampledCurve, refiner: Optional[Callable] = None,
                    max_depth: int = MAX_DEPTH) -> np.ndarray:
    """Continuous phase sigma at every sample, starting at the principal arg."""
    if curve.params.size == 0:
        return np.zeros(0)
    d = _increments(curve, refiner, max_depth) if curve.params.size > 1 else np.zeros(0)
    return float(np.angle(curve.values[0])) + np.concatenate([[0.0], np.cumsum(d)])


def wn_period(f: Callable, L: float, samples: int = 512) -> WindingEstimate:
    """Winding number of an L-periodic function over one period."""
    if L <= 0:
        raise ValueError("period must be positive")
    ends = np.asarray(f(np.array([0.0, L])), dtype=complex)
    if abs(ends[0] - ends[1]) > CLOSE_TOL:
        raise NotClosed(f"|f(0) - f(L)| = {abs(ends[0] - ends[1]):.3g}")
    t = np.linspace(0.0, L, samples + 1)
    curve = SampledCurve.sample(f, t)
    turns = unwind(curve, f) / (2 * np.pi)
    return WindingEstimate.rounded(turns)


def _atanh_grid(cutoff: float, scale: float, samples: int):
    """Grid on [-cutoff, cutoff], dense near 0 and sparse near the ends."""
    u_max = math.tanh(cutoff / scale)
    u = np.linspace(-u_max, u_max, samples)[1:-1]
    return np.concatenate([[-cutoff], scale * np.arctanh(u), [cutoff]])


def _triangle_residual(t, cutoff):
    x_far = max(cutoff, 30.0 / t.x_rate)
    return max(t.corner_residuals(cutoff, x_far).values()), x_far


def wn_triangle(t, cutoff: float = DEFAULT_CUTOFF, samples: int = 801,
                adaptive: bool = True, max_cutoff: float = 4000.0) -> WindingEstimate:
    """Winding number of a triangle symbol around its boundary.

    The loop runs along edge1 (xi from -inf up to the apex at +inf), back
    down edge3 (xi from +inf to -inf), then along edge2 (x from +inf to
    -inf). This is the orientation under which a single bound state of the
    target counts as +1.
    The three corners are closed with their analytic values. Momentum edges
    approach their corners like 1/xi; with ``adaptive`` the momentum cutoff
    is doubled until the corner residual is at most 1e-3.
    """
    res, x_far = _triangle_residual(t, cutoff)
    while res > CORNER_TOL and adaptive and cutoff * 2 <= max_cutoff:
        cutoff *= 2
        res, x_far = _triangle_residual(t, cutoff)
    if res > CORNER_TOL:
        raise CornerMismatch(f"corner residual {res:.3g} > {CORNER_TOL} at cutoff {cutoff}")

    a, b, c = t.corners
    xs = _atanh_grid(x_far, 4.0 / t.x_rate, samples)
    ks = _atanh_grid(cutoff, 8.0, samples)
    total = 0.0
    legs = [(t.edge1, ks, a, c), (t.edge3, ks[::-1], c, b), (t.edge2, xs[::-1], b, a)]
    for edge, grid, start, end in legs:
        vals = np.concatenate([[start], np.asarray(edge(grid), dtype=complex), [end]])
        # the corners sit at +-inf; give them dummy params beyond the grid ends
        step = grid[-1] - grid[-2]
        params = np.concatenate([[grid[0] - step], grid, [grid[-1] + step]])
        total += unwind(SampledCurve(params, vals), edge)
    turns = total / (2 * np.pi)
    return WindingEstimate.rounded(turns, res)


def _bump(s):
    """Smooth bump on (-1, 1), zero with all derivatives at the ends."""
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _dbump(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si ** 2)) * (-2.0 * si / (1.0 - si ** 2) ** 2)
    return out


def _phase_on(f, T, density):
    x = np.linspace(-T, T, int(math.ceil(2 * T * density)) + 1)
    return x, unwrapped_phase(SampledCurve.sample(f, x), f)


def wn_ap(f: Callable, T_schedule: Sequence[float] = DEFAULT_T_SCHEDULE,
          method: str = "window", density: float = 16.0) -> WindingEstimate:
    """Mean winding lim (sigma(T) - sigma(-T)) / 2T of an almost periodic function.

    ``method="endpoint"`` uses the defining quotient at each T and a
    least-squares fit in 1/T when the schedule has three or more points.
    ``method="window"`` (default) weights sigma' with a smooth bump on
    [-T, T]; for almost periodic f the bounded oscillating part of sigma then
    averages out much faster than 1/T. ``density`` is samples per unit length
    before adaptive refinement.
    """
    Ts = [float(T) for T in T_schedule]
    if not Ts or any(b <= a for a, b in zip(Ts, Ts[1:])):
        raise ValueError("T_schedule must be a non-empty increasing list")
    vals = []
    for T in Ts:
        x, sigma = _phase_on(f, T, density)
        if method == "endpoint":
            vals.append((sigma[-1] - sigma[0]) / (2 * T))
        elif method == "window":
            s = x / T
            w = _bump(s)
            dw = _dbump(s) / T
            vals.append(-trapezoid(sigma * dw, x) / trapezoid(w, x))
        else:
            raise ValueError(f"unknown method {method!r}")
    vals = np.array(vals)
    unc = float(np.max(np.abs(np.diff(vals)))) if len(vals) > 1 else float("nan")
    value = vals[-1]
    if method == "endpoint" and len(vals) >= 3:
        A = np.vstack([np.ones_like(vals), 1.0 / np.array(Ts)]).T
        value = np.linalg.lstsq(A, vals, rcond=None)[0][0]
    return WindingEstimate(float(value), unc, None)


def wn_pair(left, right, L: float) -> tuple:
    """(wn(f^-), wn(f^+)) over one period L."""
    return (wn_period(left, L).integer_rounded, wn_period(right, L).integer_rounded)


def dump_curve(path_or_file, curve: SampledCurve, refiner: Optional[Callable] = None):
    """Write param, re, im, unwrapped_phase as CSV."""
    phase = unwrapped_phase(curve, refiner)
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["param", "re", "im", "unwrapped_phase"])
        for t, v, ph in zip(curve.params, curve.values, phase):
            w.writerow([f"{t:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}", f"{ph:.12g}"])
    finally:
        if own:
            fh.close()
