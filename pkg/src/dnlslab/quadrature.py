"""Quadrature helpers shared across the package.

Everything here is deterministic.  Adaptive work is delegated to
scipy.integrate.quad; the helpers add complex-valued integrands, finite
truncation of half-line contours, and a vectorized fixed-panel
Gauss-Legendre rule for batched integrands.
"""

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import IntegrationError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def complex_quad(f, a, b, points=None, epsabs=1e-12, epsrel=1e-10, limit=300):
    """Adaptive quadrature of a complex-valued integrand on [a, b].

    quad's convergence warnings are converted into a hard check on its own
    error estimate, so marginal subdivisions do not spam the caller while
    genuinely bad integrals still raise.
    """
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit)
    if points is not None:
        pts = sorted(p for p in points if a < p < b)
        if pts:
            kw["points"] = pts
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        re, re_err = quad(lambda x: np.real(f(x)), a, b, **kw)
        im, im_err = quad(lambda x: np.imag(f(x)), a, b, **kw)
    err = re_err + im_err
    val = re + 1j * im
    if not np.isfinite(val):
        raise IntegrationError(f"quadrature diverged on [{a}, {b}]")
    # tripwire against garbage results; quadpack's estimate is conservative
    # on spline integrands, so precision itself is enforced by the callers'
    # oracles, not here
    if err > 1e-4 * abs(val) + 1e-8:
        raise IntegrationError(
            f"quadrature error estimate {err:.3e} too large on [{a}, {b}]"
        )
    return val, err


def gl_panels(f, a, b, n_panels):
    """Composite 16-point Gauss-Legendre rule; f may return an array whose
    last axis matches x (vectorized integrand)."""
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    x = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
    w = np.broadcast_to(half * _GL_WEIGHTS, (n_panels, _GL_NODES.size)).ravel()
    vals = f(x)
    return np.tensordot(np.asarray(vals), w, axes=([-1], [0]))

def gl_adaptive(f, a, b, tol=1e-12, max_doublings=12):
    """Panel-doubling Gauss-Legendre until successive values agree to tol."""
    n = 4
    prev = gl_panels(f, a, b, n)
    for _ in range(max_doublings):
        n *= 2
        cur = gl_panels(f, a, b, n)
        scale = max(1.0, float(np.max(np.abs(cur))))
        if np.max(np.abs(cur - prev)) <= tol * scale:
            return cur
        prev = cur
    raise IntegrationError(f"panel refinement stalled on [{a}, {b}]")


def cauchy_quad(f, a, b, lam, f_center=None):
    """int_a^b f(z)/(z - lam) dz for lam off [a, b], stable arbitrarily close
    to the contour.

    When Re lam falls inside (a, b) the local value f(Re lam) is subtracted
    on a symmetric window and reinstated through the closed-form primitive
    log(z - lam), which removes the near-singular peak from the adaptive
    quadrature.  Principal logs are safe on both sides of the axis because
    the window is symmetric about Re lam.
    """
    lam = complex(lam)
    lr = lam.real
    if lam.imag == 0 and a <= lr <= b:
        raise IntegrationError("cauchy_quad: lam lies on the contour")
    if not (a < lr < b) or abs(lam.imag) > 0.5 * (b - a):
        val, _ = complex_quad(lambda z: f(z) / (z - lam), a, b,
                              points=[lr] if a < lr < b else None)
        return val
    w = min(lr - a, b - lr)
    f0 = f(lr) if f_center is None else f_center
    h = min(1e-6, 0.01 * w)
    f1 = (f(lr + h) - f(lr - h)) / (2.0 * h)

    def reg(z):
        z = np.asarray(z, dtype=float)
        inside = np.abs(z - lr) < w
        local = np.where(inside, f0 + f1 * (z - lr), 0.0)
        return (f(z) - local) / (z - lam)

    val, _ = complex_quad(reg, a, b, points=[lr - w, lr, lr + w])
    # primitives of the subtracted linear piece on [lr-w, lr+w]
    log_jump = np.log(lr + w - lam) - np.log(lr - w - lam)
    val += f0 * log_jump
    val += f1 * (2.0 * w + (lam - lr) * log_jump)
    return val


def trapezoid_tail(values, dx):
    """Cumulative trapezoid of `values` from each node to the right grid end
    (zero tail beyond the grid).  Returns an array of the same length."""
    v = np.asarray(values)
    seg = 0.5 * (v[:-1] + v[1:]) * dx
    out = np.zeros_like(v, dtype=seg.dtype if seg.size else v.dtype)
    if seg.size:
        out[:-1] = seg[::-1].cumsum()[::-1]
    return out


def richardson_h(hs, vals):
    """Extrapolate vals(h) -> vals(0) assuming an O(h) leading error, using
    the two smallest h."""
    order = np.argsort(hs)
    h1, h2 = hs[order[0]], hs[order[1]]
    v1, v2 = vals[order[0]], vals[order[1]]
    return v1 + (v1 - v2) * h1 / (h2 - h1)
