"""The concrete operator model.

Parameter points (m, kappa) on the self-adjoint set, their point spectra, the
scattering symbol S, the wave operator written as a sum of products
a(D) b(X) with bounded factors, the triangle symbol of the Fredholm case,
the periodic asymptotic parts of S, and the Fourier data of F_{in,kappa}.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import specfn
from .errors import BranchError, DegenerateBranch, DomainError, MExcluded, NotSelfAdjoint

SA_TOL = 1e-9
MINUS = -1
PLUS = 1


class Branch(enum.Enum):
    REAL = "real"
    IMAGINARY = "imaginary"


class Side(enum.Enum):
    MOMENTUM = "momentum"
    POSITION = "position"


class SymbolClass(enum.Enum):
    LIMITS = "limits_at_both_ends"
    VANISH_PLUS = "vanish_at_plus_infinity"
    PERIODIC = "periodic"
    ASYMPTOTICALLY_PERIODIC = "asymptotically_periodic"
    ALMOST_PERIODIC = "almost_periodic"


class Orientation(enum.Enum):
    TARGET_LEFT = "target_left"
    REFERENCE_LEFT = "reference_left"


# --------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ParamPoint:
    m: complex
    kappa: complex
    branch: Branch
    varsigma: complex

    @property
    def n(self) -> float:
        """Imaginary part of m; the frequency parameter of the imaginary branch."""
        return float(self.m.imag)

    def __str__(self):
        return f"(m={self.m:.6g}, kappa={self.kappa:.6g})"


@dataclass(frozen=True)
class ParamPair:
    target: ParamPoint
    reference: ParamPoint
    sign: int = MINUS

    def __post_init__(self):
        if self.sign not in (MINUS, PLUS):
            raise ValueError("sign must be MINUS (-1) or PLUS (+1)")


def validate_sa(m, kappa) -> ParamPoint:
    """Check (m, kappa) against the self-adjoint set and tag its branch.

    Real branch: m in (-1, 1) minus {0} and kappa real.
    Imaginary branch: m = i n with n real nonzero and |kappa| = 1.
    """
    m = complex(m)
    kappa = complex(kappa)
    if abs(m) <= SA_TOL:
        raise MExcluded("m = 0 is excluded")
    if abs(m.imag) <= SA_TOL:
        if not -1.0 < m.real < 1.0:
            raise NotSelfAdjoint(f"real m must lie in (-1, 1), got {m.real}")
        if abs(kappa.imag) > SA_TOL:
            raise NotSelfAdjoint(f"real m requires real kappa, got {kappa}")
        m, kappa = complex(m.real, 0.0), complex(kappa.real, 0.0)
        return ParamPoint(m, kappa, Branch.REAL, specfn.varsigma(m, kappa))
    if abs(m.real) <= SA_TOL:
        if abs(abs(kappa) - 1.0) > SA_TOL:
            raise NotSelfAdjoint(f"imaginary m requires |kappa| = 1, got |kappa| = {abs(kappa)}")
        m = complex(0.0, m.imag)
        kappa = kappa / abs(kappa)
        return ParamPoint(m, kappa, Branch.IMAGINARY, specfn.varsigma(m, kappa))
    raise NotSelfAdjoint(f"m must be real or purely imaginary, got {m}")


def point(m, kappa) -> ParamPoint:
    return validate_sa(m, kappa)


def pair(target, reference, sign=MINUS) -> ParamPair:
    """Build a ParamPair from two ParamPoints or two (m, kappa) tuples."""
    if not isinstance(target, ParamPoint):
        target = validate_sa(*target)
    if not isinstance(reference, ParamPoint):
        reference = validate_sa(*reference)
    return ParamPair(target, reference, sign)


DIRICHLET = (0.5, 0.0)


# --------------------------------------------------------------------------
# point spectrum


@dataclass(frozen=True)
class EigenvalueSet:
    kind: str  # "finite" or "lattice"
    values: tuple = ()
    lambda0: Optional[float] = None
    ratio: Optional[float] = None

    @property
    def count(self):
        if self.kind == "lattice":
            return math.inf
        return len(self.values)

    def lattice(self, j):
        """lambda0 * ratio**j for integer j (lattice kind only)."""
        j = np.asarray(j)
        return self.lambda0 * self.ratio ** j


def eigenvalues(p: ParamPoint) -> EigenvalueSet:
    """Point spectrum -4 exp(-w), w in (1/m) Ln(varsigma), |Im w| < pi."""
    if p.branch is Branch.IMAGINARY:
        n = p.n
        arg = float(np.angle(p.varsigma)) % (2 * np.pi)
        return EigenvalueSet("lattice", lambda0=-4.0 * math.exp(-arg / n),
                             ratio=math.exp(2 * math.pi / n))
    if p.varsigma == 0:
        return EigenvalueSet("finite", ())
    m = p.m.real
    log_mod = math.log(abs(p.varsigma))
    arg = float(np.angle(p.varsigma))
    # |Im w_k| < pi  <=>  |arg + 2 pi k| < pi |m|
    kmax = int(math.ceil(abs(m) / 2 + 1))
    found = []
    for k in range(-kmax, kmax + 1):
        w = complex(log_mod, arg + 2 * math.pi * k) / m
        if abs(abs(w.imag) - math.pi) <= 1e-9:
            warnings.warn(f"branch k={k} lies on |Im w| = pi; not counted", DegenerateBranch)
            continue
        if abs(w.imag) < math.pi:
            lam = -4.0 * np.exp(-w)
            found.append(lam.real if abs(lam.imag) < 1e-12 * abs(lam) else lam)
    return EigenvalueSet("finite", tuple(sorted(found, key=lambda v: complex(v).real)))


def eigenvalue_count_window(p: ParamPoint, T: float) -> int:
    """Number of eigenvalues of H_{in,kappa} in [-4 e^{2 pi T}, -4 e^{-2 pi T}]."""
    if p.branch is not Branch.IMAGINARY:
        raise BranchError("eigenvalue_count_window needs an imaginary-branch point")
    n = abs(p.n)
    a = float(np.angle(p.varsigma)) % (2 * np.pi)
    # lambda_j = -4 exp(-(a + 2 pi j)/n) lies in the window iff
    # -n T <= a/(2 pi) + j <= n T
    shift = a / (2 * math.pi)
    lo = math.ceil(-n * T - shift - 1e-12)
    hi = math.floor(n * T - shift + 1e-12)
    return max(0, hi - lo + 1)


# --------------------------------------------------------------------------
# scattering symbol


def _ratio(m: complex, vs: complex, x):
    """(1 - vs e^{i pi m} e^{2mx}) / (1 - vs e^{-i pi m} e^{2mx}), overflow-free."""
    x = np.asarray(x, dtype=float)
    if vs == 0:
        return np.ones_like(x, dtype=complex)
    t = 2.0 * m * x
    up = vs * np.exp(1j * np.pi * m)
    down = vs * np.exp(-1j * np.pi * m)
    big = t.real > 0
    e = np.exp(np.where(big, -t, t))
    # e = e^{2mx} where not big, e^{-2mx} where big
    num = np.where(big, e - up, 1.0 - up * e)
    den = np.where(big, e - down, 1.0 - down * e)
    return num / den


def _ratio_limit(m: complex, vs: complex, end: int) -> complex:
    if vs == 0 or m.real == 0:
        raise BranchError("ratio has no limit for oscillating or trivial symbol")
    grows = (m.real > 0) == (end > 0)
    return complex(np.exp(2j * np.pi * m)) if grows else 1.0 + 0j


def scattering_symbol(pr: ParamPair, x):
    """S_{m,kappa;m',kappa'}(x) of the W^- quotient."""
    t, r = pr.target, pr.reference
    phase = np.exp(-1j * np.pi * (t.m - r.m))
    return phase * _ratio(t.m, t.varsigma, x) / _ratio(r.m, r.varsigma, x)


def scattering_limit(pr: ParamPair, end: int) -> complex:
    """S(end * inf) for a pair of real-branch points."""
    t, r = pr.target, pr.reference
    if t.branch is not Branch.REAL or r.branch is not Branch.REAL:
        raise BranchError("scattering limits exist for real-branch pairs only")
    val = complex(np.exp(-1j * np.pi * (t.m - r.m)))
    if t.varsigma != 0:
        val *= _ratio_limit(t.m, t.varsigma, end)
    if r.varsigma != 0:
        val /= _ratio_limit(r.m, r.varsigma, end)
    return val


# --------------------------------------------------------------------------
# symbol factors and factorized operators


@dataclass(frozen=True)
class SymbolFactor:
    side: Side
    func: Callable
    kind: SymbolClass
    end_values: Optional[tuple] = None
    period: Optional[float] = None
    constant: Optional[complex] = None
    label: str = ""

    def __call__(self, t):
        if self.constant is not None:
            return np.full(np.shape(t), self.constant, dtype=complex)
        return self.func(t)

    def conj(self) -> "SymbolFactor":
        f = self.func
        ends = None if self.end_values is None else tuple(np.conj(v) for v in self.end_values)
        const = None if self.constant is None else complex(np.conj(self.constant))
        return SymbolFactor(self.side, lambda t: np.conj(f(t)), self.kind, ends,
                            self.period, const, f"conj({self.label})")

    def limit(self, end: int) -> complex:
        if self.constant is not None:
            return self.constant
        if self.end_values is None:
            raise BranchError(f"factor {self.label} has no limits at +-inf")
        return self.end_values[0 if end < 0 else 1]


@dataclass(frozen=True)
class Term:
    coeff: complex
    factors: tuple

    def adjoint(self) -> "Term":
        return Term(complex(np.conj(self.coeff)), tuple(f.conj() for f in reversed(self.factors)))


@dataclass(frozen=True)
class FactorizedOperator:
    """Sum of ordered products coeff * f_1 f_2 ... of a(D) and b(X) factors.

    Factors act right-to-left like operators: the last factor in a term is
    applied first.
    """
    terms: tuple
    label: str = ""

    def adjoint(self) -> "FactorizedOperator":
        return FactorizedOperator(tuple(t.adjoint() for t in self.terms), f"{self.label}*")

    def __matmul__(self, other: "FactorizedOperator") -> "FactorizedOperator":
        terms = tuple(Term(a.coeff * b.coeff, a.factors + b.factors)
                      for a in self.terms for b in other.terms)
        return FactorizedOperator(terms, f"{self.label}.{other.label}")

    def position_factors(self):
        return [f for t in self.terms for f in t.factors if f.side is Side.POSITION]

    def momentum_factors(self):
        return [f for t in self.terms for f in t.factors if f.side is Side.MOMENTUM]

    def symbol(self, x, xi_):
        """Ordering-free symbol sum_terms coeff * prod a(xi) b(x)."""
        x, xi_ = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi_, float))
        out = np.zeros(x.shape, dtype=complex)
        for t in self.terms:
            val = np.full(x.shape, t.coeff, dtype=complex)
            for f in t.factors:
                val = val * f(xi_ if f.side is Side.MOMENTUM else x)
            out += val
        return out

    @property
    def algebra(self) -> SymbolClass:
        """Smallest symbol class containing every position factor."""
        periods = set()
        has_limits = False
        for f in self.position_factors():
            if f.constant is not None:
                continue
            if f.kind is SymbolClass.PERIODIC:
                periods.add(round(f.period, 12))
            else:
                has_limits = True
        if len(periods) > 1:
            return SymbolClass.ALMOST_PERIODIC
        if periods:
            return SymbolClass.ASYMPTOTICALLY_PERIODIC if has_limits else SymbolClass.PERIODIC
        return SymbolClass.LIMITS


def _momentum_pair(a: complex, sa: int, b: complex, sb: int, label: str) -> SymbolFactor:
    """xi -> Xi_a(sa xi) Xi_b(sb xi) with sa = -sb; has limits at both ends."""
    assert sa == -sb
    ends = (specfn.xi_pair_limit(a, b, -sa), specfn.xi_pair_limit(a, b, sa))
    if a == b:
        return SymbolFactor(Side.MOMENTUM, None, SymbolClass.LIMITS, (1, 1), constant=1.0 + 0j,
                            label=label)

    def f(x):
        x = np.asarray(x, dtype=float)
        return specfn.xi(a, sa * x) * specfn.xi(b, sb * x)

    return SymbolFactor(Side.MOMENTUM, f, SymbolClass.LIMITS, ends, label=label)


DENOM_MARGIN = 1e-8


def _check_denominator(m: complex, q: complex):
    """1 - q e^{2mx} (bounded form) stays away from 0 on a coarse grid."""
    x = np.linspace(-40.0, 40.0, 4001) / max(abs(m), 1e-3)
    t = 2.0 * m * x
    big = t.real > 0
    e = np.exp(np.where(big, -t, t))
    d = np.where(big, np.abs(e - q), np.abs(1.0 - q * e))
    if np.min(d) < DENOM_MARGIN:
        raise DomainError(f"position factor denominator reaches {np.min(d):.3g} for m = {m}")


def _position_pair(p: ParamPoint, phase_sign: int, label: str):
    """The bounded position factors 1/(1 - q e^{2mx}) and e^{2mx}/(1 - q e^{2mx}),
    q = varsigma e^{phase_sign i pi m}."""
    m, vs = p.m, p.varsigma
    q = vs * np.exp(phase_sign * 1j * np.pi * m)
    if vs == 0:
        one = SymbolFactor(Side.POSITION, None, SymbolClass.LIMITS, (1, 1), constant=1.0 + 0j,
                           label=f"{label}1")
        return one, None

    def b1(x):
        x = np.asarray(x, dtype=float)
        t = 2.0 * m * x
        big = t.real > 0
        e = np.exp(np.where(big, -t, t))
        return np.where(big, e / (e - q), 1.0 / (1.0 - q * e))

    def b2(x):
        x = np.asarray(x, dtype=float)
        t = 2.0 * m * x
        big = t.real > 0
        e = np.exp(np.where(big, -t, t))
        return np.where(big, 1.0 / (e - q), e / (1.0 - q * e))

    _check_denominator(m, q)
    if p.branch is Branch.IMAGINARY:
        period = math.pi / abs(p.n)
        f1 = SymbolFactor(Side.POSITION, b1, SymbolClass.PERIODIC, period=period, label=f"{label}1")
        f2 = SymbolFactor(Side.POSITION, b2, SymbolClass.PERIODIC, period=period, label=f"{label}2")
    else:
        if m.real > 0:
            e1, e2 = (1.0 + 0j, 0j), (0j, complex(-1.0 / q))
        else:
            e1, e2 = (0j, 1.0 + 0j), (complex(-1.0 / q), 0j)
        f1 = SymbolFactor(Side.POSITION, b1, SymbolClass.LIMITS, e1, label=f"{label}1")
        f2 = SymbolFactor(Side.POSITION, b2, SymbolClass.LIMITS, e2, label=f"{label}2")
    return f1, f2


def wave_factors(pr: ParamPair) -> FactorizedOperator:
    """The wave operator W^{sign}_{m,kappa;m',kappa'} as a sum of bounded products.

    W = c Xi_{1/2}(-D) [Xi_m(D) b1(X) - vs Xi_{-m}(D) b2(X)]
          x [g1(X) Xi_{m'}(-D) - vs' g2(X) Xi_{-m'}(-D)] Xi_{1/2}(D)

    with b1 = 1/(1 - vs e^{s i pi m} e^{2mX}), b2 = e^{2mX} b1, the analogous
    g1, g2 built from (m', vs') with the opposite phase sign, and
    c = e^{s i pi m / 2} e^{-s i pi m' / 2}. Adjacent momentum factors are
    merged into Xi-products, which have limits at both ends.
    """
    t, r, s = pr.target, pr.reference, pr.sign
    c = complex(np.exp(s * 1j * np.pi * t.m / 2) * np.exp(-s * 1j * np.pi * r.m / 2))
    half = 0.5 + 0j
    left = [(1.0 + 0j, _momentum_pair(half, -1, t.m, 1, "Xi_1/2(-D)Xi_m(D)"))]
    if t.varsigma != 0:
        left.append((-t.varsigma, _momentum_pair(half, -1, -t.m, 1, "Xi_1/2(-D)Xi_-m(D)")))
    right = [(1.0 + 0j, _momentum_pair(r.m, -1, half, 1, "Xi_m'(-D)Xi_1/2(D)"))]
    if r.varsigma != 0:
        right.append((-r.varsigma, _momentum_pair(-r.m, -1, half, 1, "Xi_-m'(-D)Xi_1/2(D)")))
    b = _position_pair(t, s, "beta")
    g = _position_pair(r, -s, "gamma")

    terms = []
    for i, (ci, a) in enumerate(left):
        for j, (cj, bb) in enumerate(right):
            factors = tuple(f for f in (a, b[i], g[j], bb)
                            if not (f.constant is not None and f.constant == 1))
            terms.append(Term(c * ci * cj, factors))
    sign = "-" if s == MINUS else "+"
    return FactorizedOperator(tuple(terms), f"W{sign}[{t};{r}]")


def quotient_triangle(op: FactorizedOperator):
    """Image of op under a(D)b(X) -> (a(.)b(-inf), a(-inf)b(.), a(.)b(+inf)).

    Returns three callables (edge1, edge2, edge3). Needs limits on every
    position factor and a limit at -inf on every momentum factor.
    """

    def edge_x(end):
        def f(xi_):
            xi_ = np.asarray(xi_, dtype=float)
            out = np.zeros(xi_.shape, dtype=complex)
            for t in op.terms:
                val = np.full(xi_.shape, t.coeff, dtype=complex)
                for fac in t.factors:
                    val = val * (fac(xi_) if fac.side is Side.MOMENTUM else fac.limit(end))
                out += val
            return out
        return f

    def edge_xi(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for t in op.terms:
            val = np.full(x.shape, t.coeff, dtype=complex)
            for fac in t.factors:
                val = val * (fac.limit(-1) if fac.side is Side.MOMENTUM else fac(x))
            out += val
        return out

    return edge_x(-1), edge_xi, edge_x(1)


# --------------------------------------------------------------------------
# triangle symbol (Fredholm case)


@dataclass(frozen=True)
class TriangleSymbol:
    """Boundary data of a Fredholm symbol on the triangle.

    edge1: xi -> value on the x = -inf edge
    edge2: x  -> value on the xi = -inf edge (the scattering symbol)
    edge3: xi -> value on the x = +inf edge
    corners: analytic corner values (edge2(-inf), edge2(+inf), apex at xi = +inf)
    """
    edge1: Callable
    edge2: Callable
    edge3: Callable
    corners: tuple
    x_rate: float
    point: ParamPoint
    orientation: Orientation

    def corner_residuals(self, xi_far: float, x_far: float) -> dict:
        a, b, c = self.corners
        return {
            "edge1(-xi)": abs(self.edge1(-xi_far) - a),
            "edge2(-x)": abs(self.edge2(-x_far) - a),
            "edge2(+x)": abs(self.edge2(x_far) - b),
            "edge3(-xi)": abs(self.edge3(-xi_far) - b),
            "edge1(+xi)": abs(self.edge1(xi_far) - c),
            "edge3(+xi)": abs(self.edge3(xi_far) - c),
        }


def triangle_symbol(p: ParamPoint, orientation: Orientation = Orientation.TARGET_LEFT) -> TriangleSymbol:
    """Triangle symbol of W^-_{m,kappa;1/2,0} (TARGET_LEFT) or of
    W^-_{1/2,0;m,kappa} (REFERENCE_LEFT), for m in (0, 1) and real kappa."""
    if p.branch is not Branch.REAL or not 0.0 < p.m.real < 1.0:
        raise BranchError("triangle_symbol needs m in (0, 1) and real kappa")
    m = p.m.real
    dir_ = validate_sa(*DIRICHLET)
    pr = ParamPair(p, dir_, MINUS)
    c1 = np.exp(0.5j * np.pi * (0.5 - m))
    c3 = np.exp(0.5j * np.pi * (0.5 + m))

    def edge1(x):
        x = np.asarray(x, dtype=float)
        return c1 * specfn.xi(0.5, -x) * specfn.xi(m, x)

    def edge2(x):
        return scattering_symbol(pr, x)

    if p.varsigma == 0:
        edge3 = edge1
        corner_b = complex(np.exp(-1j * np.pi * (m - 0.5)))
    else:
        def edge3(x):
            x = np.asarray(x, dtype=float)
            return c3 * specfn.xi(0.5, -x) * specfn.xi(-m, x)
        corner_b = scattering_limit(pr, 1)
    corners = (complex(np.exp(-1j * np.pi * (m - 0.5))), corner_b, 1.0 + 0j)

    if orientation is Orientation.TARGET_LEFT:
        return TriangleSymbol(edge1, edge2, edge3, corners, 2 * m, p, orientation)
    # REFERENCE_LEFT is the pointwise conjugate
    return TriangleSymbol(lambda x: np.conj(edge1(x)), lambda x: np.conj(edge2(x)),
                          lambda x: np.conj(edge3(x)), tuple(np.conj(corners)), 2 * m, p,
                          orientation)


# --------------------------------------------------------------------------
# periodic case data


def periodic_parts(pr: ParamPair):
    """The two pi/n-periodic asymptotic functions (left, right) of S_{in,kappa;m',kappa'}."""
    t, r = pr.target, pr.reference
    if t.branch is not Branch.IMAGINARY or r.branch is not Branch.REAL:
        raise BranchError("periodic_parts needs an imaginary target and a real reference")
    base = np.exp(-1j * np.pi * (t.m - r.m))
    if r.varsigma == 0:
        lim_left = lim_right = 1.0 + 0j
    else:
        lim_left = _ratio_limit(r.m, r.varsigma, -1)
        lim_right = _ratio_limit(r.m, r.varsigma, 1)
    period = math.pi / abs(t.n)

    def make(lim):
        def f(x):
            return base * _ratio(t.m, t.varsigma, x) / lim
        return f

    left = SymbolFactor(Side.POSITION, make(lim_left), SymbolClass.PERIODIC, period=period,
                        label="S^-")
    right = SymbolFactor(Side.POSITION, make(lim_right), SymbolClass.PERIODIC, period=period,
                         label="S^+")
    return left, right


def fourier_coefficients(func, period: float, lmax: int, samples: int = 4096):
    """c_l, |l| <= lmax, of func(x) = sum_l c_l exp(2 pi i l x / period)."""
    if samples < 2 * lmax + 1:
        raise ValueError("samples must exceed 2*lmax+1")
    x = np.arange(samples) * (period / samples)
    c = np.fft.fft(func(x)) / samples
    idx = np.arange(-lmax, lmax + 1)
    return c[idx % samples]


def f_function(n: float, kappa, x):
    """F_{in,kappa}(x) = -1 / ((1 - vs e^{-pi n} e^{2inx}) (1 - vs e^{pi n} e^{2inx}))."""
    vs = specfn.varsigma(1j * n, kappa)
    e = np.exp(2j * n * np.asarray(x, dtype=float))
    return -1.0 / ((1 - vs * np.exp(-np.pi * n) * e) * (1 - vs * np.exp(np.pi * n) * e))


def f_fourier(n: float, kappa, lmax: int, samples: int = 4096):
    """Fourier coefficients c_l (l = -lmax..lmax) of F_{in,kappa} over the period pi/n."""
    if n <= 0:
        raise BranchError("f_fourier needs n > 0")
    return fourier_coefficients(lambda x: f_function(n, kappa, x), math.pi / n, lmax, samples)


def c_minus_one(n: float, kappa) -> complex:
    """Closed form conj(vs) / (e^{pi n} - e^{-pi n})."""
    vs = specfn.varsigma(1j * n, kappa)
    return complex(np.conj(vs) / (2 * math.sinh(math.pi * n)))
