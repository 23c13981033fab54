"""Complex special functions: log-Gamma, the Xi symbol, the coupling constant
varsigma and the closed-form symbols G_n^+/-.

Everything here accepts numpy arrays and broadcasts.
"""

import numpy as np

from .errors import DomainError, PoleError

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
POLE_TOL = 1e-12


def _lanczos_log_gamma(z):
    # valid for Re(z) >= 1/2; log(series) stays on the principal branch there
    z = z - 1.0
    series = np.full_like(z, _LANCZOS_COEF[0])
    for k in range(1, len(_LANCZOS_COEF)):
        series = series + _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(series)


def log_gamma(z):
    """Principal branch of log Gamma(z).

    The branch is the one analytic on the plane cut along (-inf, 0] and real
    on the positive axis (the same convention as ``scipy.special.loggamma``).
    For Re(z) < 1/2 the upward recurrence
    ``log Gamma(z) = log Gamma(z + N) - sum_k log(z + k)`` is used; each
    logarithm is principal, so the imaginary part stays continuous along
    vertical lines.

    Raises
    ------
    PoleError
        if z lies within 1e-12 of a non-positive integer.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)

    nearest = np.round(z.real)
    near_pole = (nearest <= 0) & (np.abs(z - nearest) < POLE_TOL)
    if np.any(near_pole):
        raise PoleError(f"log_gamma evaluated within {POLE_TOL} of a pole: {z[near_pole][0]}")

    shift = np.where(z.real < 0.5, np.ceil(0.5 - z.real), 0.0).astype(int)
    out = _lanczos_log_gamma(z + shift)
    for k in range(int(shift.max(initial=0))):
        active = shift > k
        out[active] -= np.log(z[active] + k)
    return out[0] if scalar else out


def gamma(z):
    return np.exp(log_gamma(z))


def xi(m, xi_):
    """Xi_m(xi) = exp(i ln2 xi) Gamma((m+1+i xi)/2) / Gamma((m+1-i xi)/2).

    Evaluated as a difference of log-Gammas, so it does not overflow for
    large |xi|. Requires Re(m) > -1.
    """
    m = np.asarray(m, dtype=complex)
    if np.any(m.real <= -1.0):
        raise DomainError("Xi_m requires Re(m) > -1")
    x = np.asarray(xi_, dtype=float)
    top = (m + 1.0 + 1j * x) / 2.0
    bottom = (m + 1.0 - 1j * x) / 2.0
    return np.exp(1j * np.log(2.0) * x + log_gamma(top) - log_gamma(bottom))


def xi_pair_limit(m, m2, direction):
    """Exact limit of Xi_m(direction*inf) * Xi_m2(-direction*inf).

    ``direction = -1`` is the limit of ``xi -> Xi_m(-xi) Xi_m2(xi)`` as
    xi -> +inf and equals exp(-i pi (m - m2)/2); ``direction = +1`` is the
    xi -> -inf limit of the same function, exp(+i pi (m - m2)/2).
    """
    if direction not in (-1, 1):
        raise ValueError("direction must be -1 or +1")
    m = complex(m)
    m2 = complex(m2)
    if m.real <= -1 or m2.real <= -1:
        raise DomainError("Xi_m requires Re(m) > -1")
    return complex(np.exp(direction * 1j * np.pi * (m - m2) / 2.0))


def varsigma(m, kappa):
    """kappa * Gamma(-m) / Gamma(m)."""
    m = complex(m)
    if m.imag == 0.0 and float(m.real).is_integer():
        raise PoleError(f"varsigma undefined for integer m = {m.real}")
    kappa = complex(kappa)
    if kappa == 0:
        return 0j
    return complex(kappa * np.exp(log_gamma(-m) - log_gamma(m)))


def g_pm(n, xi_, sign):
    """Closed form of G_n^{sign}(xi) = Xi_{sign*in}(-xi) Xi_{-sign*in}(xi).

    G_n^+-(xi) = e^{+-pi n} (e^{pi xi} + e^{-+pi n}) / (e^{pi xi} + e^{+-pi n}),
    rewritten with exponentials of non-positive argument only.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    x = np.asarray(xi_, dtype=float)
    a = np.pi * x
    b = np.pi * n
    lo = -sign * b
    hi = sign * b
    # multiply numerator and denominator by exp(-max(a, lo)) resp. exp(-max(a, hi))
    num_scale = np.maximum(a, lo)
    den_scale = np.maximum(a, hi)
    num = np.exp(a - num_scale) + np.exp(lo - num_scale)
    den = np.exp(a - den_scale) + np.exp(hi - den_scale)
    return np.exp(hi + num_scale - den_scale) * num / den


def g_pm_limit(n, sign, end):
    """G_n^{sign}(end * inf): e^{sign*pi*n} at +inf, e^{-sign*pi*n} at -inf."""
    if end == 1:
        return float(np.exp(sign * np.pi * n))
    if end == -1:
        return float(np.exp(-sign * np.pi * n))
    raise ValueError("end must be -1 or +1")
