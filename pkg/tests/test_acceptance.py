"""Acceptance criteria 1-8. Each test prints one line: criterion N: PASS|FAIL ..."""

import functools
import time

import numpy as np
import pytest

from indexlab import model, verify, winding
from indexlab.verify import Settings

BASE = Settings()
PERIODIC_CASES = ((0.5, 1), (1.0, np.exp(1j * np.pi / 4)), (2.0, -1))
ASYMPTOTIC_CASES = ((1.0, 1, 0.5, -1.0), (1.0, 1j, 0.5, 0.0))
RELATIVE_CASE = (1.0, 1, 0.5, -1.0)
AP_CASES = ((1.0, 1, 0.5, 1), (1.0, np.exp(0.3j), 1.0, -1), (2.0, 1j, 0.5, np.exp(2j)))
# truncation errors this small are round-off; "shrinks" is not required below it
ROUNDOFF_FLOOR = 1e-10


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@functools.lru_cache(maxsize=None)
def levinson_runs(settings):
    t0 = time.perf_counter()
    reps = verify.levinson_sweep(settings)
    return reps, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def periodic_runs(settings):
    out = []
    for n, k in PERIODIC_CASES:
        t0 = time.perf_counter()
        r = verify.check_periodic(n, k, settings)
        out.append((r, time.perf_counter() - t0))
    return out


@functools.lru_cache(maxsize=None)
def asymptotic_runs(settings):
    t0 = time.perf_counter()
    reps = [verify.check_asymptotic(*c, settings) for c in ASYMPTOTIC_CASES]
    return reps, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def relative_run(settings):
    t0 = time.perf_counter()
    r = verify.check_relative(*RELATIVE_CASE, settings)
    return r, time.perf_counter() - t0


def test_criterion_1_levinson_sweep(capsys):
    reps, dt = levinson_runs(BASE)
    bad = []
    for r in reps:
        count = r.rhs["eigenvalue_count"]
        agree = (r.lhs == count == round(r.rhs["minus_window_trace"])
                 == r.rhs["minus_defect_index"])
        if not (agree and r.diagnostics["gap_ok"] and r.pass_):
            bad.append(r.inputs)
    ok = len(reps) == 18 and not bad and dt < 60
    report(capsys, 1, ok, f"{18 - len(bad)}/18 cells agree, gap_ok everywhere, "
                          f"N={BASE.N} L={BASE.L:g}, {dt:.1f}s (< 60s)"
           + (f"; failing {bad}" if bad else ""))


def test_criterion_2_periodic(capsys):
    lines, ok = [], True
    for r, dt in periodic_runs(BASE):
        good = (r.lhs == -1 and abs(r.rhs["analytic"] + 1) <= 1e-8
                and abs(r.rhs["trace_full"] + 1) <= 0.05 and abs(r.rhs["trace_coker"] - 1) <= 0.05
                and abs(r.rhs["trace_ker"]) <= 0.05 and dt < 30)
        ok &= good
        lines.append(f"n={r.inputs['n']:g}: wn={r.lhs} full={r.rhs['trace_full']:.6f} "
                     f"coker={r.rhs['trace_coker']:.6f} ker={r.rhs['trace_ker']:.1e} "
                     f"|analytic+1|={abs(r.rhs['analytic'] + 1):.1e} {dt:.1f}s")
    report(capsys, 2, ok, "; ".join(lines))


def test_criterion_3_identities(capsys):
    t0 = time.perf_counter()
    r = verify.check_identities(BASE)
    dt = time.perf_counter() - t0
    worst = ", ".join(f"{k}={v:.1e}" for k, v in r.lhs.items())
    report(capsys, 3, r.pass_ and dt < 10, f"{worst}; {dt:.1f}s (< 10s)")


@pytest.mark.xfail(strict=True, reason="corner residual of the momentum edges is "
                   "|m^2 - 1/4| / (2 cutoff) exactly; 1.75e-3 (m=0.2) and 3.25e-3 (m=0.8) "
                   "at cutoff 60, so 1e-3 needs cutoff >= 195; wn_triangle adapts its cutoff")
def test_criterion_3_corner_residuals_whole_sweep_at_cutoff_60():
    for m in verify.LEVINSON_SWEEP_M:
        for k in verify.LEVINSON_SWEEP_KAPPA:
            tri = model.triangle_symbol(model.point(m, k))
            assert max(tri.corner_residuals(60.0, 60.0).values()) <= 1e-3


def test_corner_residual_rate_is_exact():
    # the analysis behind the xfail above
    for m in (0.2, 0.8):
        tri = model.triangle_symbol(model.point(m, -1.0))
        for c in (60.0, 240.0):
            assert tri.corner_residuals(c, c)["edge1(-xi)"] == pytest.approx(
                abs(m * m - 0.25) / (2 * c), rel=2e-3)


def test_criterion_4_asymptotic(capsys):
    reps, dt = asymptotic_runs(BASE)
    ok = dt < 60
    lines = []
    for r in reps:
        t = r.rhs["trace_pair"]
        ok &= tuple(r.lhs) == (-1, -1) and all(abs(v + 1) <= 0.05 for v in t) and r.pass_
        lines.append(f"{r.inputs['kappa']}: wn_pair={tuple(r.lhs)} trace=({t[0]:.6f}, {t[1]:.6f})")
    report(capsys, 4, ok, "; ".join(lines) + f"; {dt:.1f}s (< 60s)")


def test_criterion_5_relative(capsys):
    r, dt = relative_run(BASE)
    # the window trace of W(1/2,0; m',k') is its Index = +1; the identity reads -Index = -1
    wt = r.rhs["minus_window_trace"]
    ok = (r.lhs == -1 and r.rhs["minus_eigenvalue_count"] == -1 and abs(wt + 1) <= 0.1
          and r.diagnostics["chain_residual"] <= 0.05 and dt < 120 and r.pass_)
    report(capsys, 5, ok, f"wn={r.lhs} -count={r.rhs['minus_eigenvalue_count']} "
                          f"-window trace={wt:.6f} chain residual={r.diagnostics['chain_residual']:.1e} "
                          f"at N={BASE.chain_N}; {dt:.1f}s (< 120s)")


def test_criterion_6_almost_periodic(capsys):
    t0 = time.perf_counter()
    ok, lines = True, []
    for n, k, n2, k2 in AP_CASES:
        r = verify.check_almost_periodic(n, k, n2, k2, BASE)
        closed = -2 * (n - n2)
        pr = model.pair((1j * n, k), (1j * n2, k2))
        ext = winding.wn_ap(lambda x: model.scattering_symbol(pr, x), BASE.T_schedule,
                            method="endpoint")
        good = (abs(r.lhs - closed) <= 0.02 and abs(ext.value - closed) <= 0.02
                and abs(r.rhs["trace_route"] - closed) <= 0.1 and r.pass_)
        ok &= good
        lines.append(f"(n,n')=({n:g},{n2:g}): target {closed:g} wn_ap={r.lhs:.5f} "
                     f"extrapolated={ext.value:.5f} trace={r.rhs['trace_route']:.5f}")
    dt = time.perf_counter() - t0
    report(capsys, 6, ok and dt < 120, "; ".join(lines) + f"; {dt:.1f}s (< 120s)")


def test_criterion_7_density(capsys):
    t0 = time.perf_counter()
    ok, worst = True, 0
    ns = (0.5, 1.0, 2.0)
    for n in ns:
        p = model.point(1j * n, 1)
        for T in (10.0, 100.0):
            d = abs(model.eigenvalue_count_window(p, T) - 2 * n * T)
            worst = max(worst, d)
            ok &= d <= 2
    for n in ns:
        for n2 in ns:
            if n != n2:
                r = verify.check_density(n, 1, n2, np.exp(1j), (10.0, 100.0))
                ok &= r.pass_
    dt = time.perf_counter() - t0
    report(capsys, 7, ok and dt < 1, f"max |N(T) - 2nT| = {worst:g} (<= 2), ratios within "
                                     f"2/(min(n,n') T); {dt:.3f}s (< 1s)")


def _shrinks(e1, e2):
    return e2 <= e1 or e2 <= ROUNDOFF_FLOOR


def test_criterion_8_convergence(capsys):
    D = BASE.doubled()
    problems = []

    a, _ = levinson_runs(BASE)
    b, _ = levinson_runs(D)
    for r1, r2 in zip(a, b):
        ints1 = (r1.lhs, r1.rhs["eigenvalue_count"], round(r1.rhs["minus_window_trace"]),
                 r1.rhs["minus_defect_index"])
        ints2 = (r2.lhs, r2.rhs["eigenvalue_count"], round(r2.rhs["minus_window_trace"]),
                 r2.rhs["minus_defect_index"])
        e1 = r1.diagnostics["window_trace_truncation_error"]
        e2 = r2.diagnostics["window_trace_truncation_error"]
        if ints1 != ints2 or not _shrinks(e1, e2) or not r2.pass_:
            problems.append(("levinson", r1.inputs, ints1, ints2, e1, e2))

    for (r1, _), (r2, _) in zip(periodic_runs(BASE), periodic_runs(D)):
        if r1.lhs != r2.lhs or any(round(r1.rhs[k]) != round(r2.rhs[k])
                                   for k in ("trace_full", "trace_coker", "trace_ker")):
            problems.append(("periodic ints", r1.inputs))
        for k in ("truncation_error_full", "truncation_error_coker", "truncation_error_ker"):
            if not _shrinks(r1.diagnostics[k], r2.diagnostics[k]):
                problems.append(("periodic", r1.inputs, k, r1.diagnostics[k], r2.diagnostics[k]))

    a, _ = asymptotic_runs(BASE)
    b, _ = asymptotic_runs(D)
    for r1, r2 in zip(a, b):
        if (tuple(r1.lhs) != tuple(r2.lhs)
                or [round(v) for v in r1.rhs["trace_pair"]] != [round(v) for v in r2.rhs["trace_pair"]]
                or not _shrinks(r1.diagnostics["truncation_error"], r2.diagnostics["truncation_error"])):
            problems.append(("asymptotic", r1.inputs))

    r1, _ = relative_run(BASE)
    r2, _ = relative_run(D)
    if (r1.lhs != r2.lhs or round(r1.rhs["minus_window_trace"]) != round(r2.rhs["minus_window_trace"])
            or not _shrinks(r1.diagnostics["window_trace_truncation_error"],
                            r2.diagnostics["window_trace_truncation_error"])
            or not r2.pass_):
        problems.append(("relative", r1.diagnostics, r2.diagnostics))

    report(capsys, 8, not problems,
           f"doubled (N, L, K, K_big, Q) = ({D.N}, {D.L:g}, {D.K}, {D.K_big}, {D.Q}) on criteria "
           f"1, 2, 4, 5: integers unchanged, truncation errors shrink or sit below "
           f"{ROUNDOFF_FLOOR:g}" + (f"; problems {problems}" if problems else ""))
