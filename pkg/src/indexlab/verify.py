"""Scenario runners for the index identities.

Each ``check_*`` computes the winding side and the operator side of one
identity, by independent routes where possible, and returns a
ScenarioReport. A report passes when every listed comparison holds within
its tolerance and no numeric guard (singular-value gap, corner closure) was
tripped.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import model, quantize, specfn, winding
from .model import DIRICHLET, Orientation

SCHEMA = 1
VERSION = "0.1.0"


class Scenario(enum.Enum):
    LEVINSON = "levinson"
    PERIODIC = "periodic"
    ASYMPTOTIC = "asymptotic"
    RELATIVE = "relative"
    ALMOST_PERIODIC = "almost-periodic"
    DENSITY = "density"
    IDENTITIES = "identities"


@dataclass(frozen=True)
class Settings:
    N: int = 1024
    L: float = 40.0
    collar: float = 0.1
    tau_low: float = quantize.TAU_LOW
    tau_high: float = quantize.TAU_HIGH
    cutoff: float = winding.DEFAULT_CUTOFF
    K: int = 48
    K_big: int = 128
    Q: int = 32
    lmax: Optional[int] = None
    T_schedule: tuple = winding.DEFAULT_T_SCHEDULE
    chain_N: int = 2048
    line_tol: float = 0.1
    trace_tol: float = 0.05
    ap_tol: float = 0.02

    def grid(self, N=None) -> quantize.GridSpec:
        return quantize.GridSpec(self.L, self.N if N is None else N, self.collar)

    def floquet(self, n: float) -> quantize.FloquetSpec:
        return quantize.FloquetSpec(n, self.K, self.K_big, self.Q)

    def doubled(self) -> "Settings":
        """Every discretization parameter doubled; the grid keeps its spacing."""
        return replace(self, N=2 * self.N, L=2 * self.L, K=2 * self.K, K_big=2 * self.K_big,
                       Q=2 * self.Q, chain_N=2 * self.chain_N,
                       T_schedule=tuple(2 * t for t in self.T_schedule))


@dataclass
class Comparison:
    label: str
    value: object
    target: object
    tol: float

    @property
    def ok(self) -> bool:
        a = np.atleast_1d(np.asarray(self.value, dtype=complex))
        b = np.atleast_1d(np.asarray(self.target, dtype=complex))
        return bool(np.all(np.abs(a - b) <= self.tol))


@dataclass
class ScenarioReport:
    scenario: Scenario
    inputs: dict
    lhs: object
    rhs: dict
    tolerance: float
    comparisons: list
    diagnostics: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)
    guard_ok: bool = True
    elapsed: float = 0.0

    @property
    def pass_(self) -> bool:
        return self.guard_ok and all(c.ok for c in self.comparisons)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "version": VERSION,
            "scenario": self.scenario.value,
            "inputs": _plain(self.inputs),
            "lhs": _plain(self.lhs),
            "rhs": _plain(self.rhs),
            "tolerance": _plain(self.tolerance),
            "pass": self.pass_,
            "checks": [{"label": c.label, "value": _plain(c.value), "target": _plain(c.target),
                        "tol": _plain(c.tol), "ok": c.ok} for c in self.comparisons],
            "diagnostics": _plain(self.diagnostics),
            "settings": _plain(self.settings),
            "guard_ok": self.guard_ok,
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


def _num(x):
    """Round to 12 significant digits so JSON output is reproducible."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}") + 0.0
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        if x.imag == 0:
            return _num(x.real)
        return {"re": _num(x.real), "im": _num(x.imag)}
    return x


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    return _num(obj)


def _settings_dict(s: Settings, keys) -> dict:
    d = asdict(s)
    return {k: d[k] for k in keys}


_LINE_KEYS = ("N", "L", "collar", "tau_low", "tau_high", "cutoff", "line_tol")
_FIBER_KEYS = ("K", "K_big", "Q", "lmax", "trace_tol")


# --------------------------------------------------------------------------


def check_levinson(m: float, kappa: float, settings: Settings = Settings()) -> ScenarioReport:
    """wn of the triangle symbol = number of eigenvalues = -Index(W^-_{m,kappa;1/2,0})."""
    t0 = time.perf_counter()
    p = model.validate_sa(m, kappa)
    tri = model.triangle_symbol(p, Orientation.TARGET_LEFT)
    wn = winding.wn_triangle(tri, settings.cutoff)
    count = model.eigenvalues(p).count
    op = model.wave_factors(model.pair(p, DIRICHLET))
    spec = settings.grid()
    trace = quantize.window_trace_index(op, spec)
    ker, coker, gap_ok = quantize.defect_counts(quantize.line_quantize(op, spec),
                                                settings.tau_low, settings.tau_high)
    neg_trace = -trace.real
    rhs = {"eigenvalue_count": count, "minus_window_trace": neg_trace,
           "minus_defect_index": -(ker - coker)}
    comps = [
        Comparison("wn_triangle = eigenvalue count", wn.integer_rounded, count, 0),
        Comparison("-window trace = eigenvalue count", neg_trace, count, settings.line_tol),
        Comparison("-(dim ker - dim coker) = eigenvalue count", -(ker - coker), count, 0),
    ]
    diag = {"wn_value": wn.value, "corner_residual": wn.uncertainty, "gap_ok": gap_ok,
            "dim_ker": ker, "dim_coker": coker,
            "window_trace_truncation_error": trace.truncation_error}
    return ScenarioReport(Scenario.LEVINSON, {"m": m, "kappa": kappa}, wn.integer_rounded, rhs,
                          settings.line_tol, comps, diag, _settings_dict(settings, _LINE_KEYS),
                          guard_ok=gap_ok, elapsed=time.perf_counter() - t0)


def check_periodic(n: float, kappa, settings: Settings = Settings()) -> ScenarioReport:
    """wn over one period of S_{in,kappa;1/2,0} = -1 = Trace_n([W^-, W^-*])."""
    t0 = time.perf_counter()
    pr = model.pair((1j * n, kappa), DIRICHLET)
    wn = winding.wn_period(lambda x: model.scattering_symbol(pr, x), math.pi / n)
    full, coker, ker = quantize.commutator_trace_periodic(pr, settings.floquet(n), settings.lmax)
    analytic = quantize.analytic_commutator_trace(n, kappa)
    tol = settings.trace_tol
    rhs = {"trace_full": full.real, "analytic": analytic, "trace_coker": coker.real,
           "trace_ker": ker.real}
    comps = [
        Comparison("wn_period = -1", wn.integer_rounded, -1, 0),
        Comparison("analytic trace = -1", analytic, -1, 1e-8),
        Comparison("numeric trace = analytic trace", full.real, analytic.real, tol),
        Comparison("Trace_n [W, W*] = wn", full.real, wn.integer_rounded, tol),
        Comparison("Trace_n (1 - W W*) = 1", coker.real, 1.0, tol),
        Comparison("Trace_n (1 - W* W) = 0", ker.real, 0.0, tol),
    ]
    diag = {"wn_value": wn.value, "truncation_error_full": full.truncation_error,
            "truncation_error_coker": coker.truncation_error,
            "truncation_error_ker": ker.truncation_error,
            "lmax": quantize.default_lmax(n) if settings.lmax is None else settings.lmax}
    return ScenarioReport(Scenario.PERIODIC, {"n": n, "kappa": complex(kappa)},
                          wn.integer_rounded, rhs, tol, comps, diag,
                          _settings_dict(settings, _FIBER_KEYS), elapsed=time.perf_counter() - t0)


def check_asymptotic(n: float, kappa, mprime: float, kprime: float,
                     settings: Settings = Settings()) -> ScenarioReport:
    """wn_{A_n}(S_{in,kappa;m',kappa'}) = (-1, -1) = both periodic traces of the commutator."""
    t0 = time.perf_counter()
    pr = model.pair((1j * n, kappa), (mprime, kprime))
    left, right = model.periodic_parts(pr)
    lhs = winding.wn_pair(left, right, math.pi / n)
    dpr = model.pair((1j * n, kappa), DIRICHLET)
    _, coker, _ = quantize.commutator_trace_periodic(dpr, settings.floquet(n), settings.lmax)
    t = -coker.real
    tol = settings.trace_tol
    comps = [
        Comparison("wn(S^-) = wn(S^+)", lhs[0], lhs[1], 0),
        Comparison("wn(S^-) = -Trace_n 1_p", lhs[0], t, tol),
        Comparison("wn(S^+) = -Trace_n 1_p", lhs[1], t, tol),
    ]
    # the asymptotic parts are approached at rate exp(-2 m' x)
    R = 30.0 / mprime
    x = np.linspace(R, R + math.pi / n, 257)
    tail = float(np.max(np.abs(model.scattering_symbol(pr, x) - right(x))))
    head = float(np.max(np.abs(model.scattering_symbol(pr, -x) - left(-x))))
    diag = {"truncation_error": coker.truncation_error, "asymptotic_residual_right": tail,
            "asymptotic_residual_left": head}
    return ScenarioReport(Scenario.ASYMPTOTIC,
                          {"n": n, "kappa": complex(kappa), "mprime": mprime, "kprime": kprime},
                          list(lhs), {"trace_pair": [t, t]}, tol, comps, diag,
                          _settings_dict(settings, _FIBER_KEYS), elapsed=time.perf_counter() - t0)


def check_relative(n: float, kappa, mprime: float, kprime: float,
                   settings: Settings = Settings()) -> ScenarioReport:
    """wn of the reference-left triangle = -number of eigenvalues of H_{m',kappa'}
    = -Index(W^-_{1/2,0;m',kappa'}), plus the chain rule through W^-_{in,kappa;.}."""
    t0 = time.perf_counter()
    p = model.validate_sa(mprime, kprime)
    wn = winding.wn_triangle(model.triangle_symbol(p, Orientation.REFERENCE_LEFT), settings.cutoff)
    count = model.eigenvalues(p).count
    op = model.wave_factors(model.pair(DIRICHLET, p))
    trace = quantize.window_trace_index(op, settings.grid())
    # window trace = dim ker - dim coker = Index
    neg_index = -trace.real
    chain = quantize.chain_rule_residual(n, kappa, mprime, kprime, settings.grid(settings.chain_N))
    rhs = {"minus_eigenvalue_count": -count, "minus_window_trace": neg_index}
    comps = [
        Comparison("wn_triangle = -eigenvalue count", wn.integer_rounded, -count, 0),
        Comparison("-Index (window trace) = -eigenvalue count", neg_index, -count, settings.line_tol),
        Comparison("chain rule residual", chain, 0.0, 0.05),
    ]
    diag = {"wn_value": wn.value, "corner_residual": wn.uncertainty, "chain_residual": chain,
            "window_trace": trace.real, "window_trace_truncation_error": trace.truncation_error}
    st = _settings_dict(settings, _LINE_KEYS)
    st["chain_N"] = settings.chain_N
    return ScenarioReport(Scenario.RELATIVE,
                          {"n": n, "kappa": complex(kappa), "mprime": mprime, "kprime": kprime},
                          wn.integer_rounded, rhs, settings.line_tol, comps, diag, st,
                          elapsed=time.perf_counter() - t0)


def check_almost_periodic(n: float, kappa, nprime: float, kprime,
                          settings: Settings = Settings()) -> ScenarioReport:
    """wn_ap(S_{in,kappa;in',kappa'}) = -2(n - n') = Trace_ap([W^-, W^-*])."""
    t0 = time.perf_counter()
    pr = model.pair((1j * n, kappa), (1j * nprime, kprime))
    wn = winding.wn_ap(lambda x: model.scattering_symbol(pr, x), settings.T_schedule)
    closed = -2.0 * (n - nprime)
    tr_t = quantize.projection_trace_ap(pr.target, settings.floquet(n))
    tr_r = quantize.projection_trace_ap(pr.reference, settings.floquet(nprime))
    # [W, W*] = 1_p(H_ref) - 1_p(H_target)
    trace = (tr_r.value - tr_t.value).real
    comps = [
        Comparison("trace route = closed form", trace, closed, settings.trace_tol * 2),
        Comparison("wn_ap = closed form", wn.value, closed, settings.ap_tol),
        Comparison("wn_ap = trace route", wn.value, trace, settings.trace_tol * 2),
    ]
    diag = {"wn_ap_uncertainty": wn.uncertainty,
            "truncation_error": tr_t.truncation_error + tr_r.truncation_error,
            "trace_ap_target": tr_t.real, "trace_ap_reference": tr_r.real}
    st = _settings_dict(settings, _FIBER_KEYS)
    st["T_schedule"] = list(settings.T_schedule)
    return ScenarioReport(Scenario.ALMOST_PERIODIC,
                          {"n": n, "kappa": complex(kappa), "nprime": nprime,
                           "kprime": complex(kprime)},
                          wn.value, {"trace_route": trace, "closed_form": closed},
                          settings.trace_tol * 2, comps, diag, st,
                          elapsed=time.perf_counter() - t0)


def check_density(n: float, kappa, nprime: float, kprime,
                  T_list: Sequence[float] = (10.0, 100.0)) -> ScenarioReport:
    """N_{in,kappa}(T) / N_{in',kappa'}(T) -> n / n'; N(T) = 2nT + O(1)."""
    t0 = time.perf_counter()
    p, q = model.validate_sa(1j * n, kappa), model.validate_sa(1j * nprime, kprime)
    T_list = sorted(float(T) for T in T_list)
    counts = {T: (model.eigenvalue_count_window(p, T), model.eigenvalue_count_window(q, T))
              for T in T_list}
    T = T_list[-1]
    a, b = counts[T]
    ratio = a / b if b else math.inf
    tol = 2.0 / (min(n, nprime) * T)
    comps = [Comparison("count ratio = n/n'", ratio, n / nprime, tol)]
    for Ti in T_list:
        comps.append(Comparison(f"N(T={Ti:g}) - 2nT", counts[Ti][0], 2 * n * Ti, 2))
        comps.append(Comparison(f"N'(T={Ti:g}) - 2n'T", counts[Ti][1], 2 * nprime * Ti, 2))
    diag = {"counts": [[Ti, c[0], c[1]] for Ti, c in counts.items()]}
    return ScenarioReport(Scenario.DENSITY,
                          {"n": n, "kappa": complex(kappa), "nprime": nprime,
                           "kprime": complex(kprime), "T_list": T_list},
                          ratio, {"n_over_nprime": n / nprime}, tol, comps, diag,
                          elapsed=time.perf_counter() - t0)


# --------------------------------------------------------------------------
# identity suite

IDENTITY_TOLERANCES = {
    "reflection": 1e-10,
    "cosh": 1e-10,
    "xi_unit_modulus": 1e-12,
    "xi_inverse": 1e-12,
    "xi_adjoint": 1e-12,
    "xi_pair_limit_at_100": 1e-3,
    "c_minus_one": 1e-10,
    "scattering_unitarity": 1e-12,
    "triangle_corners": 1e-3,
}


def identity_residuals(cutoff: float = winding.DEFAULT_CUTOFF,
                       triangle_points=((0.5, -1.0), (0.5, 0.0), (0.5, 2.0))) -> dict:
    """Worst residual of each closed-form identity on fixed test grids."""
    out = {}
    re, im = np.meshgrid(np.linspace(-0.39, 0.39, 27), np.linspace(-5, 5, 41))
    z = (re + 1j * im).ravel()
    lhs = np.exp(specfn.log_gamma(z + 0.5) + specfn.log_gamma(-z + 0.5))
    rhs = np.pi / np.cos(np.pi * z)
    out["reflection"] = float(np.max(np.abs(lhs / rhs - 1)))

    xs = np.linspace(-20, 20, 801)
    out["cosh"] = max(float(np.max(np.abs(specfn.g_pm(n, xs, -1) + specfn.g_pm(n, xs + 2 * n, 1)
                                          - 2 * np.cosh(np.pi * n)))) for n in (0.3, 1.0, 2.0))

    ms = np.array([-0.9, -0.5, -0.2, 0.1, 0.3, 0.5, 0.8, 0.95])
    xi_ = np.linspace(-50, 50, 1001)
    out["xi_unit_modulus"] = max(float(np.max(np.abs(np.abs(specfn.xi(m, xi_)) - 1))) for m in ms)
    out["xi_inverse"] = max(float(np.max(np.abs(specfn.xi(m, xi_) * specfn.xi(m, -xi_) - 1)))
                            for m in list(ms) + [0.3 + 0.4j, 1j, -0.5j])
    out["xi_adjoint"] = max(float(np.max(np.abs(np.conj(specfn.xi(1j * n, xi_))
                                                - specfn.xi(-1j * n, -xi_))))
                            for n in (0.3, 1.0, 2.0))
    out["xi_pair_limit_at_100"] = abs(specfn.xi(0.5, -100.0) * specfn.xi(0.3, 100.0)
                                      - specfn.xi_pair_limit(0.5, 0.3, -1))

    out["c_minus_one"] = max(abs(model.f_fourier(n, k, 1)[0] - model.c_minus_one(n, k))
                             for n in (0.5, 1.0, 2.0)
                             for k in (1, 1j, -1, np.exp(1j * np.pi / 4)))

    x = np.linspace(-50, 50, 2001)
    pairs = [((0.5, -1), DIRICHLET), ((0.2, 3), (0.7, -2)), ((0.8, -0.2), (0.3, 1)),
             ((1j, 1), DIRICHLET), ((1j, 1), (0.5j, 1j)), ((2j, -1), (0.5, -1))]
    out["scattering_unitarity"] = max(
        float(np.max(np.abs(np.abs(model.scattering_symbol(model.pair(*pr), x)) - 1)))
        for pr in pairs)

    worst = 0.0
    for m, k in triangle_points:
        tri = model.triangle_symbol(model.validate_sa(m, k))
        worst = max(worst, max(tri.corner_residuals(cutoff, cutoff).values()))
    out["triangle_corners"] = worst
    return out


def check_identities(settings: Settings = Settings()) -> ScenarioReport:
    t0 = time.perf_counter()
    res = identity_residuals(settings.cutoff)
    comps = [Comparison(k, v, 0.0, IDENTITY_TOLERANCES[k]) for k, v in res.items()]
    # corner residuals of the other sweep points, at the fixed cutoff (not compared)
    extra = {}
    for m in (0.2, 0.8):
        tri = model.triangle_symbol(model.validate_sa(m, -1.0))
        extra[f"triangle_corners_m{m}"] = max(tri.corner_residuals(settings.cutoff,
                                                                  settings.cutoff).values())
    return ScenarioReport(Scenario.IDENTITIES, {}, res, dict(IDENTITY_TOLERANCES),
                          max(IDENTITY_TOLERANCES.values()), comps, extra,
                          {"cutoff": settings.cutoff}, elapsed=time.perf_counter() - t0)


# --------------------------------------------------------------------------

LEVINSON_SWEEP_M = (0.2, 0.5, 0.8)
LEVINSON_SWEEP_KAPPA = (-3.0, -1.0, -0.2, 0.0, 0.5, 2.0)


def levinson_sweep(settings: Settings = Settings(), ms=LEVINSON_SWEEP_M,
                   kappas=LEVINSON_SWEEP_KAPPA):
    return [check_levinson(m, k, settings) for m in ms for k in kappas]
