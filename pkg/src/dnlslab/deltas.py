"""The scalar conjugator delta and its companions kappa, delta0, delta1.

All integrals run over the oriented half line I^-_{xi,eta} (left of xi for
eta = +1, right of xi for eta = -1) and truncate where the reflection
samples vanish, since kappa is exactly zero there.  delta0 regularizes the
endpoint singularity by subtracting kappa(xi) on the unit subinterval next
to xi; the subtracted integrand is bounded, the remaining term vanishes in
the limit, and the result is a complex unit by construction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SpectralSingularityError
from .frames import ConeFrame
from .grids import ScatteringData
from .quadrature import cauchy_quad, complex_quad


def kappa(xi, d: ScatteringData):
    """kappa(xi) = -(1/2pi) log(1 - eps*xi*|rho(xi)|^2)."""
    xi_arr = np.asarray(xi, dtype=float)
    arg = 1.0 - d.eps * xi_arr * np.abs(d.rho_at(xi_arr)) ** 2
    if np.any(arg <= 0):
        raise SpectralSingularityError("1 - eps*lambda*|rho|^2 <= 0 in kappa")
    out = -np.log(arg) / (2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KappaProfile:
    xi: float
    kappa: float
    kappa_sup: float


def kappa_profile(xi, d: ScatteringData) -> KappaProfile:
    return KappaProfile(float(xi), kappa(xi, d), d.kappa_inf())


def _iminus_window(frame: ConeFrame, d: ScatteringData, pad=0.0):
    """Intersection of I^- with the reflection support, or None."""
    lo, hi = d.support()
    if lo == hi:
        return None
    if frame.eta > 0:
        a, b = lo - pad, min(hi + pad, frame.xi)
    else:
        a, b = max(lo - pad, frame.xi), hi + pad
    return (a, b) if b > a else None


def delta(lam, frame: ConeFrame, d: ScatteringData) -> complex:
    """delta(lambda) = exp(i int_{I^-} kappa(z)/(z - lambda) dz), for lambda
    at distance >= 1e-6 from the contour."""
    lam = complex(lam)
    win = _iminus_window(frame, d)
    if win is None:
        return 1.0 + 0.0j
    a, b = win
    if abs(lam.imag) < 1e-6 and (frame.eta * lam.real <= frame.eta * frame.xi + 1e-6):
        raise DomainError(
            "lambda too close to the integration half line; use delta0 at xi"
        )
    val = cauchy_quad(lambda z: kappa(z, d), a, b, lam)
    return complex(np.exp(1j * val))


def delta0(frame: ConeFrame, d: ScatteringData) -> complex:
    """Unit-modulus limit coefficient of delta at the stationary point:
    delta0 = exp(i int_{I^-} (kappa(s) - chi(s) kappa(xi)) / (s - xi) ds)
    with chi the indicator of the unit interval of I^- adjacent to xi."""
    xi, eta = frame.xi, frame.eta
    win = _iminus_window(frame, d, pad=1.5)
    if win is None:
        return 1.0 + 0.0j
    a, b = win
    if eta > 0:
        a = min(a, xi - 1.25)
        b = xi
        chi_lo, chi_hi = xi - 1.0, xi
    else:
        a = xi
        b = max(b, xi + 1.25)
        chi_lo, chi_hi = xi, xi + 1.0
    k_xi = kappa(xi, d)

    def f(s):
        s = np.asarray(s, dtype=float)
        chi = (s > chi_lo) & (s < chi_hi)
        num = kappa(s, d) - np.where(chi, k_xi, 0.0)
        ds = s - xi
        core = np.where(np.abs(ds) < 1e-13, _kappa_slope(xi, d), num / np.where(ds == 0, 1.0, ds))
        return core

    val, _ = complex_quad(f, a, b, points=[chi_lo, chi_hi, xi])
    out = complex(np.exp(1j * val))
    if abs(abs(out) - 1.0) > 1e-10:
        raise DomainError(f"delta0 modulus deviates from 1 by {abs(abs(out)-1):.3e}")
    return out / abs(out)


def _kappa_slope(xi, d, h=1e-6):
    return (kappa(xi + h, d) - kappa(xi - h, d)) / (2.0 * h)


def delta1(frame: ConeFrame, d: ScatteringData) -> complex:
    """First moment at infinity: delta1 = -i int_{I^-} kappa(z) dz."""
    win = _iminus_window(frame, d)
    if win is None:
        return 0.0 + 0.0j
    val, _ = complex_quad(lambda z: kappa(z, d) + 0.0j, win[0], win[1])
    return complex(-1j * val)
