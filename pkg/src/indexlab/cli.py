"""Command-line front end: ``indexlab <scenario> [flags]``.

Exit codes: 0 all reports pass, 1 a check failed, 2 bad arguments,
3 a numeric guard tripped (singular-value gap, phase refinement, corner
closure).
"""

from __future__ import annotations

import argparse
import cmath
import concurrent.futures as cf
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import replace

import numpy as np

from . import model, verify, winding
from .errors import (CornerMismatch, DomainError, PoleError, RefinementExhausted,
                     ZeroCrossing)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


def parse_complex(s: str) -> complex:
    """'a', 'a+bi', 'a-bi', 'bi', 'i' or 'exp:theta' (= e^{i theta})."""
    s = s.strip()
    if s.startswith("exp:"):
        theta = float(s[4:])
        return cmath.exp(1j * theta)
    if not s or " " in s:
        raise ValueError(f"cannot parse complex value {s!r}")
    t = s.replace("i", "j")
    if t.endswith("j") and t[:-1] in ("", "+", "-"):
        t = t[:-1] + "1j"
    else:
        t = re.sub(r"([+-])j$", r"\g<1>1j", t)
    try:
        return complex(t)
    except ValueError:
        raise ValueError(f"cannot parse complex value {s!r}") from None


def format_complex(z: complex) -> str:
    """Canonical 'a+bi' form with 12 significant digits."""
    z = complex(z)
    re_, im = f"{z.real:.12g}", f"{abs(z.imag):.12g}"
    return f"{re_}{'-' if math.copysign(1.0, z.imag) < 0 else '+'}{im}i"


def _cplx(s):
    try:
        return parse_complex(s)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _floats(s):
    try:
        return tuple(float(v) for v in s.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _cplx_list(s):
    return tuple(_cplx(v) for v in s.split(",") if v)


def _range(s):
    try:
        a, b, n = s.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {s!r}")
    if n < 2 or not b > a:
        raise argparse.ArgumentTypeError("range needs start < stop and count >= 2")
    return a, b, n


_D = verify.Settings()


def _line_flags(p):
    g = p.add_argument_group("line grid (Fredholm quantization)")
    g.add_argument("--N", type=int, default=_D.N, help="grid points on [-L, L)")
    g.add_argument("--L", type=float, default=_D.L, help="half-width of the spatial window")
    g.add_argument("--collar", type=float, default=_D.collar,
                   help="fraction of the grid used to close the wrap-around seam")
    g.add_argument("--tau-low", type=float, default=_D.tau_low,
                   help="singular values below this count as defect dimensions")
    g.add_argument("--tau-high", type=float, default=_D.tau_high,
                   help="no singular value may lie in [tau-low, tau-high]")
    g.add_argument("--cutoff", type=float, default=_D.cutoff,
                   help="momentum cutoff for the triangle symbol edges")


def _fiber_flags(p):
    g = p.add_argument_group("Floquet fibers (Trace_n)")
    g.add_argument("--modes-K", type=int, default=_D.K, help="modes |k| <= K traced per fiber")
    g.add_argument("--K-big", type=int, default=_D.K_big,
                   help="modes |k| <= K_big used to form products")
    g.add_argument("--Q", type=int, default=_D.Q, help="quasi-momentum points on [0, 2n)")
    g.add_argument("--lmax", type=int, default=None,
                   help="Fourier modes of position factors (default: exp(-pi n l) < 1e-12, cap 80)")


def _target_imag(p):
    p.add_argument("--n", type=float, default=1.0, help="target order m = i n of H_{in,kappa}")
    p.add_argument("--kappa", type=_cplx, default="1+0i",
                   help="unit-modulus coupling kappa of the target ('a+bi' or 'exp:theta')")


def _out_flags(p, fmt=True):
    p.add_argument("--out", default=None, help="output file; stdout when omitted")
    if fmt:
        p.add_argument("--format", choices=("json", "csv"), default="json", help="report format")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    ap = argparse.ArgumentParser(prog="indexlab", description=__doc__, formatter_class=fmt)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("levinson", formatter_class=fmt,
                       help="triangle winding = eigenvalue count = -Index(W)")
    p.add_argument("--m", type=float, default=0.5, help="order m in (0, 1) of H_{m,kappa}")
    p.add_argument("--kappa", type=float, default=-1.0, help="real coupling kappa of H_{m,kappa}")
    _line_flags(p)
    _out_flags(p)

    p = sub.add_parser("periodic", formatter_class=fmt,
                       help="one-period winding of S = -1 = Trace_n([W, W*])")
    _target_imag(p)
    _fiber_flags(p)
    _out_flags(p)

    p = sub.add_parser("asymptotic", formatter_class=fmt,
                       help="pair winding of the periodic parts of S = (-1, -1)")
    _target_imag(p)
    p.add_argument("--mprime", type=float, default=0.5, help="reference order m' in (0, 1)")
    p.add_argument("--kprime", type=float, default=-1.0, help="reference real coupling kappa'")
    _fiber_flags(p)
    _out_flags(p)

    p = sub.add_parser("relative", formatter_class=fmt,
                       help="reference-left triangle winding = -eigenvalue count of H_{m',kappa'}")
    _target_imag(p)
    p.add_argument("--mprime", type=float, default=0.5, help="reference order m' in (0, 1)")
    p.add_argument("--kprime", type=float, default=-1.0, help="reference real coupling kappa'")
    _line_flags(p)
    p.add_argument("--chain-N", type=int, default=_D.chain_N,
                   help="grid points for the chain-rule residual W1* W2 - W3")
    _out_flags(p)

    p = sub.add_parser("almost-periodic", formatter_class=fmt,
                       help="mean winding of S = -2(n - n') = Trace_ap([W, W*])")
    _target_imag(p)
    p.add_argument("--nprime", type=float, default=0.5, help="reference order m' = i n'")
    p.add_argument("--kprime", type=_cplx, default="1+0i", help="unit-modulus reference coupling")
    p.add_argument("--T-schedule", type=_floats, default=",".join(f"{t:g}" for t in _D.T_schedule),
                   help="half-widths T of the averaging windows for wn_ap")
    _fiber_flags(p)
    _out_flags(p)

    p = sub.add_parser("density", formatter_class=fmt,
                       help="eigenvalue counts N(T) ~ 2nT and their ratio n/n'")
    _target_imag(p)
    p.add_argument("--nprime", type=float, default=0.5, help="reference order m' = i n'")
    p.add_argument("--kprime", type=_cplx, default="1+0i", help="unit-modulus reference coupling")
    p.add_argument("--T-list", type=_floats, default="10,100",
                   help="windows [-4e^{2 pi T}, -4e^{-2 pi T}] for the counts")
    _out_flags(p)

    p = sub.add_parser("identities", formatter_class=fmt,
                       help="residuals of the closed-form special-function identities")
    p.add_argument("--cutoff", type=float, default=_D.cutoff,
                   help="momentum cutoff for the triangle corner residuals")
    _out_flags(p)

    p = sub.add_parser("sweep", formatter_class=fmt,
                       help="run a scenario over a grid of parameters")
    p.add_argument("--scenario", choices=("levinson", "periodic"), default="levinson",
                   help="scenario to sweep")
    p.add_argument("--m-list", type=_floats, default=",".join(f"{v:g}" for v in verify.LEVINSON_SWEEP_M),
                   help="orders m (levinson)")
    p.add_argument("--kappa-list", type=_floats, default=",".join(f"{v:g}" for v in verify.LEVINSON_SWEEP_KAPPA),
                   help="couplings kappa (levinson)")
    p.add_argument("--n-list", type=_floats, default="0.5,1,2", help="orders n (periodic)")
    p.add_argument("--kappa-c-list", type=_cplx_list, default="1+0i",
                   help="unit-modulus couplings (periodic)")
    _line_flags(p)
    _fiber_flags(p)
    _out_flags(p)

    p = sub.add_parser("dump-curve", formatter_class=fmt,
                       help="write a sampled symbol curve as CSV (x, re, im, phase)")
    p.add_argument("--which", choices=("scattering", "edge1", "edge3", "periodic-left",
                                       "periodic-right"), default="scattering",
                   help="scattering symbol S(x), a triangle momentum edge, or a periodic part")
    p.add_argument("--m", type=_cplx, default="0.5+0i", help="target order m (real or 'bi')")
    p.add_argument("--kappa", type=_cplx, default="-1+0i", help="target coupling kappa")
    p.add_argument("--mprime", type=_cplx, default="0.5+0i", help="reference order m'")
    p.add_argument("--kprime", type=_cplx, default="0+0i", help="reference coupling kappa'")
    p.add_argument("--range", type=_range, default="-20:20:2001",
                   help="start:stop:count of the sampled parameter")
    _out_flags(p, fmt=False)
    return ap


def _settings(args) -> verify.Settings:
    kw = {}
    for flag, key in (("N", "N"), ("L", "L"), ("collar", "collar"), ("tau_low", "tau_low"),
                      ("tau_high", "tau_high"), ("cutoff", "cutoff"), ("modes_K", "K"),
                      ("K_big", "K_big"), ("Q", "Q"), ("lmax", "lmax"),
                      ("T_schedule", "T_schedule"), ("chain_N", "chain_N")):
        if hasattr(args, flag):
            kw[key] = getattr(args, flag)
    return replace(_D, **kw)


def _run_one(job):
    name, a, st = job
    fn = {"levinson": verify.check_levinson, "periodic": verify.check_periodic}[name]
    return fn(*a, st)


def _workers():
    cap = os.environ.get("INDEXLAB_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            pass
    return n


def _reports(args):
    st = _settings(args)
    if args.cmd == "levinson":
        return [verify.check_levinson(args.m, args.kappa, st)]
    if args.cmd == "periodic":
        return [verify.check_periodic(args.n, args.kappa, st)]
    if args.cmd == "asymptotic":
        return [verify.check_asymptotic(args.n, args.kappa, args.mprime, args.kprime, st)]
    if args.cmd == "relative":
        return [verify.check_relative(args.n, args.kappa, args.mprime, args.kprime, st)]
    if args.cmd == "almost-periodic":
        return [verify.check_almost_periodic(args.n, args.kappa, args.nprime, args.kprime, st)]
    if args.cmd == "density":
        return [verify.check_density(args.n, args.kappa, args.nprime, args.kprime, args.T_list)]
    if args.cmd == "identities":
        return [verify.check_identities(st)]
    if args.cmd == "sweep":
        if args.scenario == "levinson":
            jobs = [("levinson", (m, k), st) for m in args.m_list for k in args.kappa_list]
        else:
            jobs = [("periodic", (n, k), st) for n in args.n_list for k in args.kappa_c_list]
        w = _workers()
        if w == 1 or len(jobs) == 1:
            return [_run_one(j) for j in jobs]
        with cf.ProcessPoolExecutor(max_workers=w) as ex:
            return list(ex.map(_run_one, jobs))
    raise AssertionError(args.cmd)


def _reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "inputs", "label", "value", "target", "tol", "ok"])
    for r in reports:
        d = r.to_dict()
        inp = json.dumps(d["inputs"], sort_keys=True)
        for c in d["checks"]:
            w.writerow([d["scenario"], inp, c["label"], json.dumps(c["value"]),
                        json.dumps(c["target"]), c["tol"], c["ok"]])
    return buf.getvalue()


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_curve(args):
    a, b, n = args.range
    t = np.linspace(a, b, n)
    if args.which == "scattering":
        pr = model.pair((args.m, args.kappa), (args.mprime, args.kprime))
        f = lambda x: model.scattering_symbol(pr, x)
    elif args.which in ("edge1", "edge3"):
        tri = model.triangle_symbol(model.validate_sa(args.m, args.kappa))
        f = tri.edge1 if args.which == "edge1" else tri.edge3
    else:
        left, right = model.periodic_parts(model.pair((args.m, args.kappa),
                                                      (args.mprime, args.kprime)))
        f = left if args.which == "periodic-left" else right
    curve = winding.SampledCurve.sample(f, t)
    buf = io.StringIO()
    winding.dump_curve(buf, curve, f)
    text = buf.getvalue().replace("\r\n", "\n").replace("param,", "x,", 1)
    text = text.replace("unwrapped_phase", "phase", 1)
    _emit(text, args.out)
    return EXIT_OK


_NEG_VALUE = re.compile(r"^-([0-9.]|i$)")


def _join_negative_values(argv):
    """Turn ``--flag -1:2:3`` into ``--flag=-1:2:3`` so argparse does not read
    a negative value (or range, or complex) as an option."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if (a.startswith("--") and "=" not in a and i + 1 < len(argv)
                and _NEG_VALUE.match(argv[i + 1])):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def dispatch(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        if args.cmd == "dump-curve":
            return _dump_curve(args)
        reports = _reports(args)
    except (DomainError, PoleError, ValueError) as e:
        print(f"indexlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RefinementExhausted, ZeroCrossing, CornerMismatch) as e:
        print(f"indexlab: numeric guard: {e}", file=sys.stderr)
        return EXIT_GUARD

    if getattr(args, "format", "json") == "csv":
        text = _reports_csv(reports)
    elif len(reports) == 1 and args.cmd != "sweep":
        text = reports[0].to_json() + "\n"
    else:
        text = json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n"
    _emit(text, args.out)
    if not all(r.guard_ok for r in reports):
        return EXIT_GUARD
    return EXIT_OK if all(r.pass_ for r in reports) else EXIT_FAIL


def main():
    try:
        code = dispatch()
    except BrokenPipeError:
        # output piped into e.g. head; not an error of ours
        sys.stderr.close()
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
