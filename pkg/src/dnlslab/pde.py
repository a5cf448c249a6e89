"""Pseudospectral split-step reference solver for the gauged equation

    i q_t + q_xx + i eps q^2 conj(q)_x + (1/2)|q|^4 q = 0

on a periodic domain.  The linear factor exp(-i k^2 dt) is applied exactly
in Fourier space; the cubic-derivative and quintic terms are evaluated
pseudospectrally with 2/3-rule dealiasing inside a classical
integrating-factor RK4 step.  Mass int |q|^2 dx is conserved by the flow
and monitored as the accuracy proxy.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BlowUpError, NumericalError, ValidationError
from .grids import FieldGrid


@dataclass(frozen=True)
class PdeState:
    field: FieldGrid
    t: float
    conserved_mass0: float

    @property
    def mass(self):
        return float(np.sum(np.abs(self.field.values) ** 2) * self.field.dx)

    @property
    def mass_drift(self):
        if self.conserved_mass0 == 0:
            return 0.0
        return abs(self.mass - self.conserved_mass0) / self.conserved_mass0


def make_state(q0: FieldGrid) -> PdeState:
    mass0 = float(np.sum(np.abs(q0.values) ** 2) * q0.dx)
    return PdeState(q0, 0.0, mass0)


def default_dt(dx: float, safety: float = 0.5) -> float:
    """Conservative default step for the integrating-factor scheme."""
    return 0.25 * dx * dx * safety


@lru_cache(maxsize=8)
def _kernel(n: int, dx: float, dt: float):
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    e_half = np.exp(-1j * k * k * (dt / 2.0))
    dealias = np.abs(k) <= (2.0 / 3.0) * np.max(np.abs(k))
    return k, e_half, dealias


def _nonlinear_hat(q_hat, eps, k, dealias):
    """Fourier transform of  -eps q^2 conj(q)_x + (i/2)|q|^4 q, dealiased."""
    q = np.fft.ifft(q_hat)
    # conj(q)_x from q_hat without an extra transform: F[conj q](k) = conj(q_hat(-k))
    cq_hat = np.conj(np.roll(q_hat[::-1], 1))
    dcq = np.fft.ifft(1j * k * (cq_hat * dealias))
    w = -eps * q * q * dcq + 0.5j * np.abs(q) ** 4 * q
    return np.fft.fft(w) * dealias


def step(s: PdeState, dt: float) -> PdeState:
    """One integrating-factor RK4 step of size dt."""
    if dt <= 0:
        raise ValidationError("dt must be positive")
    f = s.field
    k, e_half, dealias = _kernel(f.n, f.dx, dt)
    e_full = e_half * e_half
    v = np.fft.fft(f.values)

    n1 = _nonlinear_hat(v, f.eps, k, dealias)
    n2 = _nonlinear_hat(e_half * (v + 0.5 * dt * n1), f.eps, k, dealias)
    n3 = _nonlinear_hat(e_half * v + 0.5 * dt * n2, f.eps, k, dealias)
    n4 = _nonlinear_hat(e_full * v + dt * e_half * n3, f.eps, k, dealias)

    v_new = e_full * v + (dt / 6.0) * (e_full * n1 + 2.0 * e_half * (n2 + n3) + n4)
    q_new = np.fft.ifft(v_new)
    if not np.all(np.isfinite(q_new)):
        raise BlowUpError(f"non-finite field at t = {s.t + dt:.6g}")
    return PdeState(f.with_values(q_new, whole_line=False), s.t + dt, s.conserved_mass0)


def solve(q0: FieldGrid, t_max: float, dt: float = None, samples=()):
    """Evolve q0 to t_max recording snapshots at the requested times.

    Snapshot times are landed on exactly by adjusting the step inside each
    segment; the relative mass drift is enforced to stay below 1e-6.
    """
    if dt is None:
        dt = default_dt(q0.dx)
    times = sorted(set(float(t) for t in samples) | {float(t_max)})
    if any(t < 0 for t in times) or t_max < 0:
        raise ValidationError("this driver integrates forward from t = 0")
    state = make_state(q0)
    out = []
    if 0.0 in times:
        out.append(state)
        times.remove(0.0)
    for t_next in times:
        span = t_next - state.t
        n_steps = max(1, int(np.ceil(span / dt - 1e-12)))
        h = span / n_steps
        for _ in range(n_steps):
            state = step(state, h)
        state = PdeState(state.field, t_next, state.conserved_mass0)
        if state.mass_drift > 1e-6:
            raise NumericalError(
                f"mass drift {state.mass_drift:.3e} above 1e-6 at t = {t_next:.6g}"
            )
        out.append(state)
    return out


def snapshot_manifest(states) -> list:
    return [{"t": s.t, "mass": s.mass, "drift": s.mass_drift} for s in states]
