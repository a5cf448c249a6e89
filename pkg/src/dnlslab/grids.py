"""Sampled fields, scattering data, the gauge map, and serialization.

A FieldGrid holds complex samples of q or u on a uniform x-grid together
with the nonlinearity sign eps.  Whole-line grids are assumed numerically
zero beyond their ends; the flag is only granted when the end samples are
below 1e-8 of the peak.  ScatteringData holds reflection samples on a
uniform real spectral grid (cubic interpolation between nodes, zero
outside) plus the discrete pairs (lambda_k, C_k).

All objects are immutable after construction and every operation is pure.
"""

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, ParseError, SpectralSingularityError, TailDecayError, ValidationError
from .quadrature import trapezoid_tail

TAIL_RATIO = 1e-8


def _readonly(a, dtype):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FieldGrid:
    """Complex field samples on x0 + dx*[0..n-1] with sign eps."""

    eps: int
    x0: float
    dx: float
    values: np.ndarray
    whole_line: bool = True

    def __post_init__(self):
        if self.eps not in (-1, 1):
            raise ValidationError(f"eps must be +1 or -1, got {self.eps}")
        if not (self.dx > 0):
            raise ValidationError(f"dx must be positive, got {self.dx}")
        vals = _readonly(self.values, np.complex128)
        if vals.ndim != 1 or vals.size < 8:
            raise ValidationError("values must be a 1-d array with n >= 8")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("field samples must be finite")
        object.__setattr__(self, "values", vals)
        if self.whole_line:
            peak = float(np.max(np.abs(vals)))
            if peak > 0:
                ends = max(abs(vals[0]), abs(vals[-1]))
                if ends > TAIL_RATIO * peak:
                    raise TailDecayError(
                        f"end samples {ends:.3e} exceed {TAIL_RATIO:g} of peak {peak:.3e}"
                    )

    @property
    def n(self):
        return self.values.size

    @cached_property
    def x(self):
        return _readonly(self.x0 + self.dx * np.arange(self.n), np.float64)

    @property
    def x_end(self):
        return self.x0 + self.dx * (self.n - 1)

    def with_values(self, values, whole_line=None):
        wl = self.whole_line if whole_line is None else whole_line
        return FieldGrid(self.eps, self.x0, self.dx, values, wl)


def gauge_forward(u: FieldGrid) -> FieldGrid:
    """q(x) = exp(i*eps*int_x^inf |u|^2 dy) * u(x).  Preserves |.| pointwise."""
    _require_whole_line(u)
    tail = trapezoid_tail(np.abs(u.values) ** 2, u.dx)
    return u.with_values(np.exp(1j * u.eps * tail) * u.values)


def gauge_inverse(q: FieldGrid) -> FieldGrid:
    """u(x) = q(x) exp(-i*eps*int_x^inf |q|^2 dy); exact inverse of gauge_forward."""
    _require_whole_line(q)
    tail = trapezoid_tail(np.abs(q.values) ** 2, q.dx)
    return q.with_values(np.exp(-1j * q.eps * tail) * q.values)


def _require_whole_line(f: FieldGrid):
    if not f.whole_line:
        raise TailDecayError("operation requires a whole-line field")


def tail_integral(f: FieldGrid, x: float, weight: str = "abs2") -> complex:
    """Trapezoid integral of |f|^2 (weight='abs2') or f (weight='plain')
    from x to the right grid end; the field is zero beyond the grid."""
    _require_whole_line(f)
    if weight == "abs2":
        g = np.abs(f.values) ** 2
    elif weight == "plain":
        g = f.values
    else:
        raise ValidationError(f"unknown weight {weight!r}")
    if not (f.x0 <= x <= f.x_end + 1e-12 * f.dx):
        raise DomainError(f"x={x} outside grid [{f.x0}, {f.x_end}]")
    pos = (x - f.x0) / f.dx
    k = min(int(np.ceil(pos - 1e-12)), f.n - 1)
    total = trapezoid_tail(g, f.dx)[k]
    if k > 0 and pos < k:
        # partial cell [x, x_k], linear interpolation of the integrand
        frac = k - pos
        gk_at_x = g[k] + (g[k - 1] - g[k]) * frac
        total = total + 0.5 * (gk_at_x + g[k]) * frac * f.dx
    return complex(total)


@dataclass(frozen=True)
class DiscretePair:
    """Eigenvalue in the upper half plane and its nonzero norming constant."""

    lam: complex
    c: complex

    def __post_init__(self):
        if not (np.imag(self.lam) > 0):
            raise ValidationError(f"Im lambda must be positive, got {self.lam}")
        if self.c == 0 or not np.isfinite(self.c):
            raise ValidationError("norming constant must be finite and nonzero")
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "c", complex(self.c))


@dataclass(frozen=True)
class ScatteringData:
    """Reflection samples on a uniform real grid plus discrete pairs."""

    eps: int
    lambda_lo: float
    lambda_hi: float
    rho: np.ndarray
    discrete: tuple = ()
    t_stamp: float = 0.0

    def __post_init__(self):
        if self.eps not in (-1, 1):
            raise ValidationError(f"eps must be +1 or -1, got {self.eps}")
        if not (self.lambda_hi > self.lambda_lo):
            raise ValidationError("lambda_hi must exceed lambda_lo")
        rho = _readonly(self.rho, np.complex128)
        if rho.ndim != 1 or rho.size < 4:
            raise ValidationError("rho must be a 1-d array with m >= 4")
        if not np.all(np.isfinite(rho)):
            raise ValidationError("rho samples must be finite")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "discrete", tuple(self.discrete))
        grid = self.lambda_grid
        pos = 1.0 - self.eps * grid * np.abs(rho) ** 2
        if np.any(pos <= 0):
            k = int(np.argmin(pos))
            raise SpectralSingularityError(
                f"1 - eps*lambda*|rho|^2 = {pos[k]:.3e} <= 0 at lambda = {grid[k]:.6g}"
            )
        lams = [p.lam for p in self.discrete]
        for i in range(len(lams)):
            for j in range(i + 1, len(lams)):
                if lams[i] == lams[j]:
                    raise ValidationError(f"coincident eigenvalues at {lams[i]}")

    @property
    def m(self):
        return self.rho.size

    @cached_property
    def lambda_grid(self):
        return _readonly(np.linspace(self.lambda_lo, self.lambda_hi, self.m), np.float64)

    @cached_property
    def d_lambda(self):
        """Min pairwise gap of the full pole set {lambda_k} U {conj lambda_k}."""
        lams = [p.lam for p in self.discrete]
        pts = np.array(lams + [np.conj(l) for l in lams])
        if pts.size < 2:
            return np.inf
        diff = np.abs(pts[:, None] - pts[None, :])
        diff[np.diag_indices_from(diff)] = np.inf
        return float(diff.min())

    @cached_property
    def _spline(self):
        return CubicSpline(self.lambda_grid, self.rho, extrapolate=False)

    def rho_at(self, lam):
        """Cubic interpolation of rho; zero outside [lambda_lo, lambda_hi]."""
        lam = np.asarray(lam, dtype=float)
        out = self._spline(lam)
        out = np.where(np.isnan(out), 0.0, out)
        return complex(out) if out.ndim == 0 else out

    def kappa_inf(self):
        """sup over the grid of |kappa| (see deltas.kappa)."""
        pos = 1.0 - self.eps * self.lambda_grid * np.abs(self.rho) ** 2
        return float(np.max(np.abs(np.log(pos)))) / (2.0 * np.pi)

    def support(self, tol=1e-10):
        """Smallest grid subinterval outside of which |rho| <= tol."""
        big = np.abs(self.rho) > tol
        if not big.any():
            return (0.0, 0.0)
        g = self.lambda_grid
        idx = np.nonzero(big)[0]
        return (float(g[max(idx[0] - 1, 0)]), float(g[min(idx[-1] + 1, self.m - 1)]))


# ---------------------------------------------------------------------------
# serialization: UTF-8 JSON, no NaN/Inf, bit-exact float round trip
# ---------------------------------------------------------------------------

_FIELD_KEYS = {"eps", "x0", "dx", "re", "im", "whole_line"}
_SCATTER_KEYS = {"eps", "lambda_lo", "lambda_hi", "m", "rho_re", "rho_im", "discrete", "t"}
_PAIR_KEYS = {"re", "im", "c_re", "c_im"}


def serialize(obj) -> bytes:
    if isinstance(obj, FieldGrid):
        doc = {
            "eps": obj.eps,
            "x0": obj.x0,
            "dx": obj.dx,
            "re": obj.values.real.tolist(),
            "im": obj.values.imag.tolist(),
            "whole_line": obj.whole_line,
        }
    elif isinstance(obj, ScatteringData):
        doc = {
            "eps": obj.eps,
            "lambda_lo": obj.lambda_lo,
            "lambda_hi": obj.lambda_hi,
            "m": obj.m,
            "rho_re": obj.rho.real.tolist(),
            "rho_im": obj.rho.imag.tolist(),
            "discrete": [
                {"re": p.lam.real, "im": p.lam.imag, "c_re": p.c.real, "c_im": p.c.imag}
                for p in obj.discrete
            ],
            "t": obj.t_stamp,
        }
    else:
        raise ValidationError(f"cannot serialize {type(obj).__name__}")
    return json.dumps(doc, allow_nan=False).encode("utf-8")


def _checked(doc, keys, what):
    missing = keys - doc.keys()
    if missing:
        raise ParseError(f"{what}: missing key {sorted(missing)[0]!r}")
    unknown = doc.keys() - keys
    if unknown:
        raise ParseError(f"{what}: unknown key {sorted(unknown)[0]!r}")


def _load_doc(data: bytes):
    try:
        return json.loads(
            data.decode("utf-8"),
            parse_constant=lambda s: (_ for _ in ()).throw(ParseError(f"non-finite literal {s}")),
        )
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def deserialize_field(data: bytes) -> FieldGrid:
    doc = _load_doc(data)
    _checked(doc, _FIELD_KEYS, "field")
    vals = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
    if len(doc["re"]) != len(doc["im"]):
        raise ParseError("field: re/im length mismatch")
    return FieldGrid(doc["eps"], doc["x0"], doc["dx"], vals, doc["whole_line"])


def deserialize_scattering(data: bytes) -> ScatteringData:
    doc = _load_doc(data)
    _checked(doc, _SCATTER_KEYS, "scattering")
    if not (len(doc["rho_re"]) == len(doc["rho_im"]) == doc["m"]):
        raise ParseError("scattering: rho length disagrees with m")
    pairs = []
    for p in doc["discrete"]:
        _checked(p, _PAIR_KEYS, "discrete pair")
        pairs.append(DiscretePair(p["re"] + 1j * p["im"], p["c_re"] + 1j * p["c_im"]))
    rho = np.asarray(doc["rho_re"], dtype=float) + 1j * np.asarray(doc["rho_im"], dtype=float)
    return ScatteringData(doc["eps"], doc["lambda_lo"], doc["lambda_hi"], rho, tuple(pairs), doc["t"])


def deserialize(data: bytes):
    doc = _load_doc(data)
    if "x0" in doc:
        return deserialize_field(data)
    return deserialize_scattering(data)


def field_to_csv(f: FieldGrid) -> str:
    lines = ["x,re,im"]
    for xk, vk in zip(f.x, f.values):
        lines.append(f"{float(xk)!r},{float(vk.real)!r},{float(vk.imag)!r}")
    return "\n".join(lines) + "\n"
