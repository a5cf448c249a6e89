"""Linear flow on scattering data and the phase function theta."""

import numpy as np

from .errors import DomainError, NumericalError
from .grids import DiscretePair, ScatteringData

_LOG_HUGE = 700.0  # log of the largest double, with margin


def theta(x: float, t: float, lam) -> complex:
    """theta(x, t, lambda) = -((x/t) lambda + 2 lambda^2); stationary at
    lambda = -x/(4t)."""
    if t == 0:
        raise DomainError("theta is undefined at t = 0")
    lam = np.asarray(lam, dtype=complex)
    out = -((x / t) * lam + 2.0 * lam * lam)
    return complex(out) if out.ndim == 0 else out


def evolution_factor_log(lam: complex, t: float):
    """(log-magnitude, phase) of exp(-4i lambda^2 t); safe for any t."""
    z = -4j * lam * lam * t
    return float(z.real), float(z.imag)


def evolve(d: ScatteringData, t: float) -> ScatteringData:
    """Flow the data forward by t: rho *= exp(-4i lambda^2 t) on the real
    grid, lambda_k fixed, C_k *= exp(-4i lambda_k^2 t).

    The discrete factors are handled in (log-magnitude, phase) form so the
    only overflow risk is in the final complex materialization, which the
    wire schema requires.
    """
    if t == 0:
        return d
    grid = d.lambda_grid
    rho = d.rho * np.exp(-4j * grid * grid * t)
    pairs = []
    for p in d.discrete:
        logm, ph = evolution_factor_log(p.lam, t)
        if abs(logm + np.log(abs(p.c))) > _LOG_HUGE:
            raise NumericalError(
                f"evolved |C| has log-magnitude {logm + np.log(abs(p.c)):.1f}, "
                "outside double range"
            )
        pairs.append(DiscretePair(p.lam, p.c * np.exp(logm) * np.exp(1j * ph)))
    return ScatteringData(d.eps, d.lambda_lo, d.lambda_hi, rho, tuple(pairs), d.t_stamp + t)
