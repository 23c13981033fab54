"""Finite quantizations of factorized operators.

Two discretizations are used. On the real line, L^2(R) is replaced by N
grid points on [-L, L) with periodic wrap; momentum factors act through the
FFT and position factors act diagonally. For pi/n-periodic operators the
Floquet-Bloch fiber at quasi-momentum theta is represented in the Fourier
basis exp(i(theta + 2nk)x), |k| <= K_big: momentum factors become diagonal
and position factors become Toeplitz matrices of their Fourier coefficients.

Traces of commutators are always formed at the larger cutoff and read off a
central block, since the trace of a commutator of two finite square matrices
is zero.
"""

from __future__ import annotations

import functools
import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import model
from .errors import (BranchError, DecayError, PeriodicityError, ResolutionError,
                     UnsupportedRepresentation)
from .model import Side, SymbolClass

TAU_LOW = 0.2
TAU_HIGH = 0.8
BOX_FRACTION = 0.5
BOX_THRESHOLD = 0.5
LMAX_CAP = 80


# --------------------------------------------------------------------------
# real-line grid


@dataclass(frozen=True)
class GridSpec:
    L: float
    N: int
    collar: float = 0.1

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")
        if not 0.0 < self.collar < 0.5:
            raise ValueError("collar must lie in (0, 1/2)")

    @property
    def h(self):
        return 2.0 * self.L / self.N

    @property
    def x(self):
        return -self.L + self.h * np.arange(self.N)

    @property
    def xi(self):
        """Dual grid in FFT order, covering [-pi N/(2L), pi N/(2L))."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, self.h)

    @property
    def k_max(self):
        return np.pi * self.N / (2.0 * self.L)

    def doubled(self) -> "GridSpec":
        """The grid with twice the window and twice the points (same spacing)."""
        return GridSpec(2 * self.L, 2 * self.N, self.collar)

    def check_resolution(self, freq: float = 1.0):
        need = 16.0 * self.L * max(freq, 1.0) / np.pi
        if self.N < need:
            raise ResolutionError(f"N = {self.N} < 16 L max(2n, 2n', 1)/pi = {need:.1f}")


@dataclass
class GridOperator:
    spec: GridSpec
    matrix: np.ndarray

    @property
    def H(self) -> "GridOperator":
        return GridOperator(self.spec, self.matrix.conj().T)


def max_frequency(op) -> float:
    """Largest position frequency 2n over the periodic position factors of op."""
    f = [2.0 * np.pi / fac.period for fac in op.position_factors()
         if fac.kind is SymbolClass.PERIODIC and fac.constant is None]
    return max(f, default=0.0)


def _collar_weight(N, frac):
    # 0 in the bulk, rising to 1 over the last frac*N points
    w = np.zeros(N)
    c = max(int(frac * N), 1)
    w[N - c:] = 0.5 - 0.5 * np.cos(np.pi * np.arange(c) / c)
    return w


def _sampled_factors(op, spec: GridSpec):
    """Sample every factor once on the grid; collar position factors whose
    limits at -inf and +inf differ."""
    x, xi_ = spec.x, spec.xi
    w = _collar_weight(spec.N, spec.collar)
    cache = {}
    terms = []
    for t in op.terms:
        samples = []
        for f in t.factors:
            key = id(f)
            if key not in cache:
                if f.side is Side.MOMENTUM:
                    cache[key] = (Side.MOMENTUM, np.asarray(f(xi_), dtype=complex))
                else:
                    b = np.asarray(f(x), dtype=complex)
                    if (f.constant is None and f.end_values is not None
                            and abs(f.limit(-1) - f.limit(1)) > 1e-12):
                        b = (1.0 - w) * b + w * f.limit(-1)
                    cache[key] = (Side.POSITION, b)
            samples.append(cache[key])
        terms.append((t.coeff, samples))
    return terms


def _apply_sampled(terms, V):
    out = np.zeros(V.shape, dtype=complex)
    for coeff, samples in terms:
        A = V.astype(complex, copy=True)
        for side, s in reversed(samples):
            if side is Side.MOMENTUM:
                A = np.fft.ifft(s[:, None] * np.fft.fft(A, axis=0), axis=0)
            else:
                A = s[:, None] * A
        out += coeff * A
    return out


def apply_operator(op, spec: GridSpec, V):
    """Quantized op applied to the columns of V (shape (N,) or (N, k))."""
    V = np.asarray(V, dtype=complex)
    vec = V.ndim == 1
    if vec:
        V = V[:, None]
    out = _apply_sampled(_sampled_factors(op, spec), V)
    return out[:, 0] if vec else out


def line_quantize(op, spec: GridSpec) -> GridOperator:
    """Dense N x N matrix of op on the grid."""
    spec.check_resolution(max_frequency(op))
    return GridOperator(spec, apply_operator(op, spec, np.eye(spec.N, dtype=complex)))


@functools.lru_cache(maxsize=8)
def _box_basis_cached(L, N, xfrac, kfrac, thresh):
    spec = GridSpec(L, N)
    x, xi_ = spec.x, spec.xi
    cols = np.nonzero(np.abs(x) < xfrac * L)[0]
    band = np.abs(xi_) < kfrac * spec.k_max
    B = np.zeros((N, cols.size), dtype=complex)
    B[cols, np.arange(cols.size)] = 1.0
    B = np.fft.ifft(band[:, None] * np.fft.fft(B, axis=0), axis=0)
    lam, V = np.linalg.eigh(B.conj().T @ B)
    keep = lam > thresh
    Q = B @ (V[:, keep] / np.sqrt(lam[keep]))
    Q.flags.writeable = False
    return Q


def box_basis(spec: GridSpec, xfrac: float = BOX_FRACTION, kfrac: float = BOX_FRACTION,
              thresh: float = BOX_THRESHOLD):
    """Orthonormal basis of the phase-space box |x| < xfrac L, |xi| < kfrac K.

    Spanned by the leading singular vectors of Pi_xi Pi_x (space cutoff, then
    band limit); vectors with concentration below ``thresh`` are dropped.
    """
    return _box_basis_cached(float(spec.L), int(spec.N), float(xfrac), float(kfrac),
                             float(thresh))


def _count(sv, tau_low, tau_high):
    return int(np.sum(sv < tau_low)), not bool(np.any((sv >= tau_low) & (sv <= tau_high)))


def defect_counts(g: GridOperator, tau_low: float = TAU_LOW, tau_high: float = TAU_HIGH,
                  compress: bool = True):
    """(dim ker, dim coker, gap_ok) from singular values.

    A square matrix always has index 0, so with ``compress`` (default) the
    operator is restricted to the box basis Q of the central half of phase
    space: the kernel count uses the singular values of g Q and the cokernel
    count those of g^* Q. Defect vectors localized in the box then show up as
    singular values near 0, while the wrap-around seam and the momentum cutoff
    lie outside the box. ``compress=False`` uses the full square matrix.
    """
    if not 0.0 < tau_low < tau_high < 1.0:
        raise ValueError("need 0 < tau_low < tau_high < 1")
    M = g.matrix
    if compress:
        Q = box_basis(g.spec)
        s_ker = np.linalg.svd(M @ Q, compute_uv=False)
        s_coker = np.linalg.svd(M.conj().T @ Q, compute_uv=False)
    else:
        s_ker = s_coker = np.linalg.svd(M, compute_uv=False)
    ker, ok1 = _count(s_ker, tau_low, tau_high)
    coker, ok2 = _count(s_coker, tau_low, tau_high)
    return ker, coker, ok1 and ok2


@dataclass(frozen=True)
class TraceEstimate:
    value: complex
    truncation_error: float

    @property
    def real(self):
        return float(np.real(self.value))


def window_trace_index(op, spec: GridSpec) -> TraceEstimate:
    """Trace of P (W W^* - W^* W) P on the doubled grid, P the central box.

    W and W^* act on the grid of twice the size of ``spec``, and the trace is
    taken over the box basis Q of the central half of that grid's phase
    space: tr = ||W^* Q||_F^2 - ||W Q||_F^2. The value approximates
    dim ker - dim coker.

    For a partial isometry the commutator is the difference of two
    finite-rank projections, so its exact trace is an integer; the distance
    of the computed value to the nearest integer is reported as the
    truncation error.
    """
    spec.check_resolution(max_frequency(op))
    big = spec.doubled()
    Q = box_basis(big)
    WQ = _apply_sampled(_sampled_factors(op, big), Q)
    WhQ = _apply_sampled(_sampled_factors(op.adjoint(), big), Q)
    val = float(np.sum(np.abs(WhQ) ** 2) - np.sum(np.abs(WQ) ** 2))
    return TraceEstimate(complex(val), abs(val - round(val)))


def dump_matrix(path, matrix, N=0, L=0.0, K=0, theta=0.0):
    """Binary dump: header b"IXLM", uint32 rows, uint32 cols, then float64
    N, L, K, theta, then the matrix row-major as (re, im) pairs; all
    little-endian."""
    a = np.ascontiguousarray(matrix, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(b"IXLM")
        fh.write(struct.pack("<II", a.shape[0], a.shape[1]))
        fh.write(struct.pack("<dddd", float(N), float(L), float(K), float(theta)))
        fh.write(a.tobytes(order="C"))


def load_matrix(path):
    with open(path, "rb") as fh:
        if fh.read(4) != b"IXLM":
            raise ValueError("not a matrix dump")
        rows, cols = struct.unpack("<II", fh.read(8))
        N, L, K, theta = struct.unpack("<dddd", fh.read(32))
        a = np.frombuffer(fh.read(), dtype="<c16").reshape(rows, cols)
    return a, {"N": N, "L": L, "K": K, "theta": theta}


# --------------------------------------------------------------------------
# Floquet-Bloch fibers


@dataclass(frozen=True)
class FloquetSpec:
    n: float
    K: int = 48
    K_big: int = 128
    Q: int = 32

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("n must be positive")
        if self.K < 1 or self.K_big < 2 * self.K:
            raise ValueError("need K >= 1 and K_big >= 2K")
        if self.Q < 16:
            raise ValueError("need Q >= 16")

    @property
    def thetas(self):
        return 2.0 * self.n * np.arange(self.Q) / self.Q

    def doubled(self) -> "FloquetSpec":
        return FloquetSpec(self.n, 2 * self.K, 2 * self.K_big, 2 * self.Q)


@dataclass
class FiberOperator:
    theta: float
    matrix: np.ndarray


def default_lmax(n: float) -> int:
    """Smallest l with exp(-pi n l) < 1e-12, capped at 80."""
    return int(min(LMAX_CAP, math.ceil(12 * math.log(10) / (math.pi * n)) + 1))


def toeplitz_from_coefficients(c, lmax: int, size: int):
    """T[k + l, k] = c_l for |l| <= lmax, zero elsewhere."""
    T = np.zeros((size, size), dtype=complex)
    for l in range(-lmax, lmax + 1):
        if abs(l) >= size:
            continue
        T += np.diag(np.full(size - abs(l), c[l + lmax], dtype=complex), -l)
    return T


class _FiberBuilder:
    """Caches the Toeplitz blocks of the position factors of one operator."""

    def __init__(self, op, fspec: FloquetSpec, lmax: Optional[int] = None):
        self.op, self.fspec = op, fspec
        n = fspec.n
        period = math.pi / n
        self.lmax = default_lmax(n) if lmax is None else int(lmax)
        size = 2 * fspec.K_big + 1
        self.k = np.arange(-fspec.K_big, fspec.K_big + 1)
        self.toeplitz = {}
        for f in op.position_factors():
            if id(f) in self.toeplitz:
                continue
            if f.constant is not None:
                self.toeplitz[id(f)] = None
                continue
            if f.kind is not SymbolClass.PERIODIC:
                raise PeriodicityError(f"position factor {f.label} is not periodic")
            ratio = period / f.period
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise PeriodicityError(f"factor period {f.period} does not divide pi/n = {period}")
            c = model.fourier_coefficients(f, period, self.lmax)
            self.toeplitz[id(f)] = toeplitz_from_coefficients(c, self.lmax, size)

    def __call__(self, theta: float) -> np.ndarray:
        xi_ = theta + 2.0 * self.fspec.n * self.k
        size = self.k.size
        M = np.zeros((size, size), dtype=complex)
        for t in self.op.terms:
            A = t.coeff * np.eye(size, dtype=complex)
            for f in reversed(t.factors):
                if f.side is Side.MOMENTUM:
                    A = np.asarray(f(xi_), dtype=complex)[:, None] * A
                elif self.toeplitz[id(f)] is None:
                    A = f.constant * A
                else:
                    A = self.toeplitz[id(f)] @ A
            M += A
        return M


def fiber_quantize(op, theta: float, fspec: FloquetSpec, lmax: Optional[int] = None) -> FiberOperator:
    """Matrix of the fiber of op at quasi-momentum theta, |k| <= K_big."""
    return FiberOperator(float(theta), _FiberBuilder(op, fspec, lmax)(theta))


def _central(fspec: FloquetSpec, K: Optional[int] = None):
    K = fspec.K if K is None else K
    return slice(fspec.K_big - K, fspec.K_big + K + 1)


def commutator_trace_periodic(pr, fspec: Optional[FloquetSpec] = None, lmax: Optional[int] = None):
    """Trace_n of [W, W^*], 1 - W W^* and 1 - W^* W for W = W^-_{in,kappa;1/2,0}.

    Products are formed at K_big and traced over |k| <= K, then averaged over
    Q equispaced theta in [0, 2n) (trapezoid on a periodic integrand). The
    truncation error is the larger of the change under K -> K/2 and under
    Q -> Q/2.
    """
    t, r = pr.target, pr.reference
    if t.branch is not model.Branch.IMAGINARY or not r.varsigma == 0:
        raise BranchError("commutator_trace_periodic needs the pair ((i n, kappa); (1/2, 0))")
    if fspec is None:
        fspec = FloquetSpec(abs(t.n))
    build = _FiberBuilder(model.wave_factors(pr), fspec, lmax)
    c, h = _central(fspec), _central(fspec, fspec.K // 2)
    rows = []
    for theta in fspec.thetas:
        W = build(theta)
        WWs = W @ W.conj().T
        WsW = W.conj().T @ W
        one_m_WWs = 1.0 - np.diag(WWs).real
        one_m_WsW = 1.0 - np.diag(WsW).real
        rows.append([one_m_WWs[c].sum(), one_m_WsW[c].sum(),
                     one_m_WWs[h].sum(), one_m_WsW[h].sum()])
    rows = np.array(rows)
    mean = rows.mean(axis=0)
    half_q = rows[::2].mean(axis=0)
    coker, ker = mean[0], mean[1]
    full = ker - coker  # tr(W W^* - W^* W) = tr(1 - W^*W) - tr(1 - W W^*)
    e_coker = max(abs(mean[0] - mean[2]), abs(mean[0] - half_q[0]))
    e_ker = max(abs(mean[1] - mean[3]), abs(mean[1] - half_q[1]))
    return (TraceEstimate(complex(full), float(e_coker + e_ker)),
            TraceEstimate(complex(coker), float(e_coker)),
            TraceEstimate(complex(ker), float(e_ker)))


def analytic_commutator_trace(n: float, kappa) -> complex:
    """-varsigma c_{-1} (e^{pi n} - e^{-pi n}) with c_{-1} from the DFT of F_{in,kappa}."""
    vs = model.specfn.varsigma(1j * n, kappa)
    c = model.f_fourier(n, kappa, 1)
    c_m1 = c[0]  # index 0 holds l = -1
    return complex(-vs * c_m1 * 2.0 * math.sinh(math.pi * n))


# --------------------------------------------------------------------------
# trace formulas on generators


def _check_decay(a, eps=0.05):
    big = np.array([-1e4, -1e3, 1e3, 1e4])
    v = np.abs(np.asarray(a(big), dtype=complex)) * np.abs(big) ** (1.0 + eps)
    if not np.all(np.isfinite(v)) or v[0] > max(v[1], 1e-8) or v[3] > max(v[2], 1e-8):
        raise DecayError("momentum symbol does not decay like <xi>^(-1-eps)")


def _integrate_line(a):
    re, e1 = integrate.quad(lambda s: np.real(a(np.array([s]))[0]), -np.inf, np.inf,
                            epsabs=1e-13, epsrel=1e-12, limit=400)
    im, e2 = integrate.quad(lambda s: np.imag(a(np.array([s]))[0]), -np.inf, np.inf,
                            epsabs=1e-13, epsrel=1e-12, limit=400)
    return complex(re, im), e1 + e2


def period_mean(b, period: float, samples: int = 4096) -> complex:
    """(1/L) int_0^L b, by the trapezoid rule on one period (spectral for smooth b)."""
    x = np.arange(samples) * (period / samples)
    return complex(np.mean(np.asarray(b(x), dtype=complex)))


def trace_n_generator(a: Callable, b: Callable, n: float) -> TraceEstimate:
    """Trace_n(a(D) b(X)) = (1/2n) int a  x  (n/pi) int_0^{pi/n} b."""
    _check_decay(a)
    ia, err = _integrate_line(a)
    mb = period_mean(b, math.pi / n)
    return TraceEstimate(ia / (2 * n) * mb, err / (2 * n) * abs(mb))


def fiber_trace_generator(a: Callable, b: Callable, fspec: FloquetSpec,
                          lmax: Optional[int] = None) -> TraceEstimate:
    """Trace_n(a(D) b(X)) through fibers: theta-average of central-block traces."""
    n = fspec.n
    period = math.pi / n
    lmax = default_lmax(n) if lmax is None else lmax
    c = model.fourier_coefficients(b, period, lmax)
    size = 2 * fspec.K_big + 1
    T = toeplitz_from_coefficients(c, lmax, size)
    k = np.arange(-fspec.K_big, fspec.K_big + 1)
    cs, hs = _central(fspec), _central(fspec, fspec.K // 2)
    vals = []
    for theta in fspec.thetas:
        M = np.asarray(a(theta + 2 * n * k), dtype=complex)[:, None] * T
        d = np.diag(M)
        vals.append((d[cs].sum(), d[hs].sum()))
    vals = np.array(vals)
    v = vals[:, 0].mean()
    err = max(abs(v - vals[:, 1].mean()), abs(v - vals[::2, 0].mean()))
    return TraceEstimate(complex(v), float(err))


@dataclass(frozen=True)
class TrigPolynomial:
    """b(x) = sum_j coeffs[j] exp(i freqs[j] x)."""
    freqs: tuple
    coeffs: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for lam, c in zip(self.freqs, self.coeffs):
            out += c * np.exp(1j * lam * x)
        return out


@dataclass(frozen=True)
class ClosedForm:
    pass


@dataclass(frozen=True)
class LongWindow:
    T: float = 1000.0
    density: float = 32.0


@dataclass(frozen=True)
class OnePeriod:
    period: float


def mean_value(b, method=ClosedForm(), return_bound: bool = False):
    """Mean M(b) = lim (1/2T) int_{-T}^{T} b.

    ClosedForm reads the zero-frequency coefficient of a TrigPolynomial (or a
    constant). LongWindow(T) averages over [-T, T] by the trapezoid rule; its
    recorded bound is sum_{lam != 0} |c_lam| / (|lam| T) for a TrigPolynomial
    and 2 sup|b| / T otherwise (the latter assumes a bounded primitive of the
    oscillating part). OnePeriod(L) averages over one period.
    """
    if isinstance(method, ClosedForm):
        if np.isscalar(b):
            val, bound = complex(b), 0.0
        elif isinstance(b, TrigPolynomial):
            val = complex(sum(c for lam, c in zip(b.freqs, b.coeffs) if abs(lam) < 1e-14))
            bound = 0.0
        else:
            raise UnsupportedRepresentation("ClosedForm needs a TrigPolynomial or a constant")
    elif isinstance(method, LongWindow):
        f = (lambda x: np.full(np.shape(x), complex(b))) if np.isscalar(b) else b
        T = float(method.T)
        x = np.linspace(-T, T, int(math.ceil(2 * T * method.density)) + 1)
        v = np.asarray(f(x), dtype=complex)
        val = complex(integrate.trapezoid(v, x) / (2 * T))
        if isinstance(b, TrigPolynomial):
            bound = sum(abs(c) / (abs(lam) * T) for lam, c in zip(b.freqs, b.coeffs)
                        if abs(lam) >= 1e-14)
        else:
            bound = 2 * float(np.max(np.abs(v))) / T
    elif isinstance(method, OnePeriod):
        f = (lambda x: np.full(np.shape(x), complex(b))) if np.isscalar(b) else b
        val, bound = period_mean(f, method.period), 0.0
    else:
        raise ValueError(f"unknown method {method!r}")
    return (val, float(bound)) if return_bound else val


def trace_ap_generator(a: Callable, b, method=ClosedForm()) -> TraceEstimate:
    """Trace_ap(a(D) b(X)) = int a  x  M(b)."""
    _check_decay(a)
    ia, err = _integrate_line(a)
    mb, bound = mean_value(b, method, return_bound=True)
    return TraceEstimate(ia * mb, err * abs(mb) + abs(ia) * bound)


def projection_trace_ap(p, fspec: Optional[FloquetSpec] = None) -> TraceEstimate:
    """Trace_ap of the bound-state projection of H_{in,kappa}: 2n Trace_n(1 - W W^*)."""
    if p.branch is not model.Branch.IMAGINARY:
        raise BranchError("projection_trace_ap needs an imaginary-branch point")
    n = abs(p.n)
    if fspec is None:
        fspec = FloquetSpec(n)
    pr = model.ParamPair(p, model.validate_sa(*model.DIRICHLET), model.MINUS)
    _, coker, _ = commutator_trace_periodic(pr, fspec)
    return TraceEstimate(2 * n * coker.value, 2 * n * coker.truncation_error)


# --------------------------------------------------------------------------
# chain rule on the line


def gaussian(spec: GridSpec, center: float = 0.0, width: float = 3.0, k0: float = 0.0):
    x = spec.x
    v = np.exp(-((x - center) / width) ** 2 / 2 + 1j * k0 * x)
    return v / np.linalg.norm(v)


def chain_rule_residual(n: float, kappa, mprime: float, kprime, spec: GridSpec,
                        centers=(-5.0, 0.0, 5.0), widths=(2.0, 3.0)) -> float:
    """Largest relative residual of W1^* W2 v - W3 v over interior Gaussians v.

    W1 = W^-_{in,kappa;1/2,0}, W2 = W^-_{in,kappa;m',kappa'} and
    W3 = W^-_{1/2,0;m',kappa'}. Since W1^* W1 = 1, the chain rule gives
    W1^* W2 = W3.
    """
    target = (1j * n, kappa)
    w1 = model.wave_factors(model.pair(target, model.DIRICHLET))
    w2 = model.wave_factors(model.pair(target, (mprime, kprime)))
    w3 = model.wave_factors(model.pair(model.DIRICHLET, (mprime, kprime)))
    spec.check_resolution(max(max_frequency(w1), max_frequency(w2)))
    V = np.stack([gaussian(spec, c, w) for c in centers for w in widths], axis=1)
    lhs = apply_operator(w1.adjoint(), spec, apply_operator(w2, spec, V))
    rhs = apply_operator(w3, spec, V)
    return float(np.max(np.linalg.norm(lhs - rhs, axis=0) / np.linalg.norm(rhs, axis=0)))
