"""Direct scattering: Jost integration, transition matrix, reflection,
eigenvalue search, and norming constants.

The normalized Jost system

    dN/dx = -i lambda [sigma3, N] + Q_lambda N - (i eps / 2)|q|^2 sigma3 N

is integrated with an adaptive Dormand-Prince 4(5) stepper vectorized over
a batch of spectral points (the step size is governed by the worst member,
the accuracy by the per-element error norm).  Both Jost solutions are
normalized to the identity at their grid end and meet at the matching
point x_m in the middle of the grid, where the transition matrix and the
Wronskian for the analytically continued coefficient are formed.

Zeros of the continued coefficient in the upper half plane are located by
the argument principle on adaptively refined box contours, isolated by
quadrisection, and polished by Newton iteration whose derivative comes
from a 64-point Cauchy circle (spectrally accurate for analytic data).
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    IntegrationError,
    NonSimpleZeroError,
    NotAnEigenvalueError,
    SpectralSingularityError,
    ValidationError,
    WindingError,
)
from .grids import DiscretePair, FieldGrid, ScatteringData

JOST_RTOL = 1e-10
JOST_ATOL = 1e-12
SCAN_RTOL = 1e-6     # looser tolerance for winding-number scans only
DELTA_FLOOR = 1e-3
NEWTON_TOL = 1e-10
MAX_NEWTON = 50
DERIV_NODES = 64

# Dormand-Prince 4(5) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _dp45(rhs, x0, x1, y0, rtol, atol, max_steps=200000):
    """Adaptive Dormand-Prince step from x0 to x1 on a batched complex state."""
    y = np.array(y0, dtype=complex)
    x = float(x0)
    direction = 1.0 if x1 >= x0 else -1.0
    span = abs(x1 - x0)
    if span == 0:
        return y
    h = direction * min(span / 50.0, 0.1)
    k0 = rhs(x, y)
    for _ in range(max_steps):
        if direction * (x + h - x1) > 0:
            h = x1 - x
        ks = [k0]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
            ks.append(rhs(x + _DP_C[i] * h, yi))
        y5 = y + h * sum(b * k for b, k in zip(_DP_B5, ks))
        err = h * sum((b5 - b4) * k for b5, b4, k in zip(_DP_B5, _DP_B4, ks))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        enorm = float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))
        if enorm <= 1.0:
            x += h
            y = y5
            k0 = ks[6]  # FSAL
            if direction * (x - x1) >= 0 or abs(x - x1) < 1e-14 * span:
                return y
        factor = 0.9 * enorm ** -0.2 if enorm > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if abs(h) < 1e-14 * span:
            raise IntegrationError(f"step-size underflow near x = {x:.6g}")
    raise IntegrationError(f"integration did not reach x = {x1:.6g} (stopped at {x:.6g})")


@dataclass(frozen=True)
class JostMatrices:
    lam: complex
    n_minus: np.ndarray
    n_plus: np.ndarray
    ok: bool


@dataclass(frozen=True)
class TransitionEntries:
    alpha: complex
    beta: complex
    alpha_breve: complex
    beta_breve: complex


class _JostEngine:
    """Holds the field spline and caches analytic-coefficient evaluations."""

    def __init__(self, q: FieldGrid):
        self.field = q
        self.eps = q.eps
        self.x_left = q.x0
        self.x_right = q.x_end
        self.x_match = 0.5 * (q.x0 + q.x_end)
        self._spline = CubicSpline(q.x, q.values)
        self._alpha_cache = {}

    def q_at(self, x):
        return complex(self._spline(x))

    def _rhs_matrix(self, lams):
        eps = self.eps

        def rhs(x, n):
            qv = self.q_at(x)
            cq = np.conj(qv)
            mod2 = (qv * cq).real
            n11, n12 = n[:, 0, 0], n[:, 0, 1]
            n21, n22 = n[:, 1, 0], n[:, 1, 1]
            out = np.empty_like(n)
            half = 0.5j * eps * mod2
            out[:, 0, 0] = qv * n21 - half * n11
            out[:, 0, 1] = -2j * lams * n12 + qv * n22 - half * n12
            out[:, 1, 0] = 2j * lams * n21 + eps * lams * cq * n11 + half * n21
            out[:, 1, 1] = eps * lams * cq * n12 + half * n22
            return out

        return rhs

    def _rhs_col(self, lams, which):
        eps = self.eps

        def rhs(x, y):
            qv = self.q_at(x)
            cq = np.conj(qv)
            half = 0.5j * eps * (qv * cq).real
            a, b = y[:, 0], y[:, 1]
            out = np.empty_like(y)
            if which == 1:   # (N11, N21)
                out[:, 0] = qv * b - half * a
                out[:, 1] = 2j * lams * b + eps * lams * cq * a + half * b
            else:            # (N12, N22)
                out[:, 0] = -2j * lams * a + qv * b - half * a
                out[:, 1] = eps * lams * cq * a + half * b
            return out

        return rhs

    def matrices(self, lams, rtol=JOST_RTOL):
        """Full Jost matrices at x_match for a batch of spectral points."""
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        eye = np.broadcast_to(np.eye(2, dtype=complex), (lams.size, 2, 2)).copy()
        rhs = self._rhs_matrix(lams)
        n_minus = _dp45(rhs, self.x_left, self.x_match, eye, rtol, JOST_ATOL)
        n_plus = _dp45(rhs, self.x_right, self.x_match, eye.copy(), rtol, JOST_ATOL)
        return n_minus, n_plus

    def analytic_columns(self, lams, rtol=JOST_RTOL):
        """(N^-_(1), N^+_(2)) at x_match; the columns that continue to Im > 0."""
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        col1 = np.zeros((lams.size, 2), dtype=complex)
        col1[:, 0] = 1.0
        col2 = np.zeros((lams.size, 2), dtype=complex)
        col2[:, 1] = 1.0
        c1 = _dp45(self._rhs_col(lams, 1), self.x_left, self.x_match, col1, rtol, JOST_ATOL)
        c2 = _dp45(self._rhs_col(lams, 2), self.x_right, self.x_match, col2, rtol, JOST_ATOL)
        return c1, c2

    def alpha_breve(self, lams, rtol=JOST_RTOL):
        """Wronskian N^-_11 N^+_22 - N^-_21 N^+_12 at x_match, cached."""
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        key_rt = float(rtol)
        missing = [z for z in lams if (complex(z), key_rt) not in self._alpha_cache]
        if missing:
            c1, c2 = self.analytic_columns(np.array(missing), rtol)
            vals = c1[:, 0] * c2[:, 1] - c1[:, 1] * c2[:, 0]
            for z, v in zip(missing, vals):
                self._alpha_cache[(complex(z), key_rt)] = complex(v)
        return np.array([self._alpha_cache[(complex(z), key_rt)] for z in lams])


def _engine(q: FieldGrid) -> _JostEngine:
    return _JostEngine(q)


def integrate_jost(q: FieldGrid, lam: complex, side: str) -> np.ndarray:
    """Normalized Jost matrix at x_m, integrated from the indicated infinity."""
    if side not in ("left", "right"):
        raise ValidationError(f"side must be 'left' or 'right', got {side!r}")
    if np.imag(lam) < -1e-12:
        raise ValidationError("the continued columns require Im lambda >= 0")
    eng = _engine(q)
    n_minus, n_plus = eng.matrices([complex(lam)])
    return n_minus[0] if side == "left" else n_plus[0]


def transition_matrix(q: FieldGrid, lam: float) -> TransitionEntries:
    if abs(np.imag(lam)) > 0:
        raise ValidationError("transition matrix is defined for real lambda")
    return _transition_batch(_engine(q), np.array([float(np.real(lam))]))[0]


def _transition_batch(eng: _JostEngine, lams: np.ndarray):
    n_minus, n_plus = eng.matrices(lams.astype(complex))
    det = n_minus[:, 0, 0] * n_minus[:, 1, 1] - n_minus[:, 0, 1] * n_minus[:, 1, 0]
    inv = np.empty_like(n_minus)
    inv[:, 0, 0] = n_minus[:, 1, 1] / det
    inv[:, 0, 1] = -n_minus[:, 0, 1] / det
    inv[:, 1, 0] = -n_minus[:, 1, 0] / det
    inv[:, 1, 1] = n_minus[:, 0, 0] / det
    m = np.einsum("bij,bjk->bik", inv, n_plus)
    ph = np.exp(2j * lams * eng.x_match)
    out = []
    for k in range(lams.size):
        out.append(
            TransitionEntries(
                alpha=complex(m[k, 0, 0]),
                beta=complex(m[k, 0, 1] * ph[k]),
                alpha_breve=complex(m[k, 1, 1]),
                beta_breve=complex(m[k, 1, 0] / ph[k]),
            )
        )
    return out


def reflection(q: FieldGrid, lambda_grid) -> np.ndarray:
    """rho(lambda) = beta/alpha on a real grid; rejects data outside the
    admissible set (1 - eps lambda |rho|^2 must stay positive)."""
    grid = np.asarray(lambda_grid, dtype=float)
    eng = _engine(q)
    entries = _transition_batch(eng, grid)
    rho = np.array([e.beta / e.alpha for e in entries])
    pos = 1.0 - q.eps * grid * np.abs(rho) ** 2
    if np.any(pos <= 0):
        k = int(np.argmin(pos))
        raise SpectralSingularityError(
            f"1 - eps*lambda*|rho|^2 = {pos[k]:.3e} at lambda = {grid[k]:.6g}"
        )
    return rho


def alpha_breve(q: FieldGrid, lam) -> complex:
    """Analytically continued coefficient via the Wronskian of the two
    decaying Jost columns; valid for Im lambda >= 0."""
    if np.imag(lam) < -1e-12:
        raise ValidationError("alpha_breve requires Im lambda >= 0")
    return complex(_engine(q).alpha_breve([complex(lam)])[0])


# ---------------------------------------------------------------------------
# eigenvalue search
# ---------------------------------------------------------------------------


def _box_contour(box, pts_per_edge):
    re1, re2, im1, im2 = box
    top = np.linspace(re1, re2, pts_per_edge, endpoint=False)
    out = np.concatenate(
        [
            top + 1j * im1,
            re2 + 1j * np.linspace(im1, im2, pts_per_edge, endpoint=False),
            np.linspace(re2, re1, pts_per_edge, endpoint=False) + 1j * im2,
            re1 + 1j * np.linspace(im2, im1, pts_per_edge, endpoint=False),
        ]
    )
    return out


def _winding(eng, box, rtol=SCAN_RTOL, max_refine=10):
    pts = _box_contour(box, 16)
    vals = eng.alpha_breve(pts, rtol)
    for _ in range(max_refine):
        closed_pts = np.append(pts, pts[0])
        closed = np.append(vals, vals[0])
        dphi = np.angle(closed[1:] / closed[:-1])
        if np.min(np.abs(closed)) < 1e-9:
            raise WindingError("contour passes through a zero; move the box edges")
        bad = np.abs(dphi) > 0.5 * np.pi
        if not bad.any():
            return int(np.rint(dphi.sum() / (2.0 * np.pi)))
        mids = 0.5 * (closed_pts[:-1][bad] + closed_pts[1:][bad])
        mid_vals = eng.alpha_breve(mids, rtol)
        order = np.argsort(np.concatenate([np.arange(pts.size), np.nonzero(bad)[0] + 0.5]))
        pts = np.concatenate([pts, mids])[order]
        vals = np.concatenate([vals, mid_vals])[order]
    raise WindingError("winding number unstable under edge refinement")


def _cauchy_derivative(eng, center, radius, rtol=JOST_RTOL):
    theta = 2.0 * np.pi * np.arange(DERIV_NODES) / DERIV_NODES
    ring = center + radius * np.exp(1j * theta)
    vals = eng.alpha_breve(ring, rtol)
    return complex(np.sum(vals * np.exp(-1j * theta)) / (DERIV_NODES * radius))


def _newton_polish(eng, box, depth, delta_floor):
    re1, re2, im1, im2 = box
    z = complex(0.5 * (re1 + re2), 0.5 * (im1 + im2))
    radius = 0.25 * min(re2 - re1, im2 - im1, z.imag - delta_floor + 1e-9)
    radius = max(radius, 1e-8)
    deriv = _cauchy_derivative(eng, z, radius)
    for it in range(MAX_NEWTON):
        val = complex(eng.alpha_breve([z])[0])
        if abs(val) <= NEWTON_TOL:
            # accept only a zero inside this cell; a jump into a
            # neighbouring basin would double-count it
            if re1 - 1e-9 <= z.real <= re2 + 1e-9 and im1 - 1e-9 <= z.imag <= im2 + 1e-9:
                return z
            return None
        if deriv == 0:
            break
        step = val / deriv
        z_new = z - step
        if not (re1 - 0.5 * (re2 - re1) <= z_new.real <= re2 + 0.5 * (re2 - re1)) or z_new.imag <= delta_floor:
            break
        z = z_new
        if (it + 1) % 8 == 0:
            deriv = _cauchy_derivative(eng, z, radius)
    return None


def find_eigenvalues(q: FieldGrid, box, delta_floor=DELTA_FLOOR, _depth=0, _eng=None):
    """All zeros of the continued coefficient inside `box` (re1, re2, im1, im2),
    each polished to |value| <= 1e-10.  The count is validated against the
    boundary winding number; cells are quadrisected until each isolates a
    single simple zero."""
    box = tuple(float(b) for b in box)
    re1, re2, im1, im2 = box
    if _depth == 0:
        if not (re1 < re2 and im1 < im2):
            raise ValidationError("box must satisfy re1 < re2, im1 < im2")
        if im1 < delta_floor:
            raise ValidationError(f"box must stay above Im lambda = {delta_floor}")
    eng = _eng if _eng is not None else _engine(q)
    w = _winding(eng, box)
    if w < 0:
        raise WindingError(f"negative winding number {w}; data is not admissible")
    if w == 0:
        return []
    if _depth > 24:
        raise NonSimpleZeroError("could not isolate zeros; multiplicity > 1 suspected")
    if w == 1:
        z = _newton_polish(eng, box, _depth, delta_floor)
        if z is not None:
            return [z]
        # Newton failed: bisect the enclosing cell and keep looking
    rem = 0.5 * (re1 + re2)
    imm = 0.5 * (im1 + im2)
    zeros = []
    for sub in (
        (re1, rem, im1, imm),
        (rem, re2, im1, imm),
        (re1, rem, imm, im2),
        (rem, re2, imm, im2),
    ):
        zeros.extend(find_eigenvalues(q, sub, delta_floor, _depth + 1, eng))
    for i in range(len(zeros)):
        for j in range(i + 1, len(zeros)):
            if abs(zeros[i] - zeros[j]) < 1e-7:
                raise NonSimpleZeroError(f"coincident zeros near {zeros[i]}")
    if _depth == 0 and len(zeros) != w:
        raise WindingError(f"found {len(zeros)} zeros but the boundary winding is {w}")
    return zeros


def norming_constant(q: FieldGrid, lam_k: complex, radius=None) -> complex:
    """Connection coefficient of the two decaying Jost columns at a simple
    zero, divided by lambda_k times the Cauchy-circle derivative of the
    continued coefficient.  This is the constant whose residue dressing
    reproduces the closed-form one-soliton through the reflectionless solver."""
    eng = _engine(q)
    return _norming_with_engine(eng, complex(lam_k), radius)


def _norming_with_engine(eng, lam_k, radius=None):
    if radius is None:
        radius = 0.5 * lam_k.imag
    c1, c2 = eng.analytic_columns([lam_k])
    v1, v2 = c1[0], c2[0]
    b_ratio = np.vdot(v2, v1) / np.vdot(v2, v2)
    defect = np.linalg.norm(v1 - b_ratio * v2) / np.linalg.norm(v1)
    if defect > 1e-6:
        raise NotAnEigenvalueError(
            f"Jost columns not proportional at {lam_k} (defect {defect:.3e})"
        )
    b = b_ratio * np.exp(-2j * lam_k * eng.x_match)
    deriv = _cauchy_derivative(eng, lam_k, radius)
    return complex(b / (lam_k * deriv))


def scatter(q: FieldGrid, box, lambda_grid, delta_floor=DELTA_FLOOR) -> ScatteringData:
    """Full scattering map: reflection on the real grid plus the discrete
    pairs found inside `box`; time stamp 0."""
    grid = np.asarray(lambda_grid, dtype=float)
    eng = _engine(q)
    rho = reflection(q, grid)
    zeros = find_eigenvalues(q, box, delta_floor, _eng=eng)
    d_lam = np.inf
    pts = np.array(zeros + [np.conj(z) for z in zeros])
    if pts.size >= 2:
        diff = np.abs(pts[:, None] - pts[None, :])
        diff[np.diag_indices_from(diff)] = np.inf
        d_lam = float(diff.min())
    pairs = []
    for z in zeros:
        radius = min(0.25 * d_lam, 0.5 * z.imag) if np.isfinite(d_lam) else 0.5 * z.imag
        pairs.append(DiscretePair(z, _norming_with_engine(eng, z, radius)))
    return ScatteringData(q.eps, float(grid[0]), float(grid[-1]), rho, tuple(pairs), 0.0)
