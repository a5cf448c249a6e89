"""Space-time cone frames and the induced split of the real spectral line."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ValidationError


def xi_eta(x: float, t: float):
    """Stationary-phase point xi = -x/(4t) and eta = sgn t.

    At t = 0 the limiting pole normalization is the t -> 0+ one: xi is
    +inf for x < 0 and -inf for x >= 0.
    """
    if t != 0:
        return -x / (4.0 * t), (1 if t > 0 else -1)
    return (np.inf if x < 0 else -np.inf), 1


@dataclass(frozen=True)
class ConeFrame:
    """Cone x = x0 + v t, v in [v1, v2], x0 in [x1, x2], with a current
    evaluation point (x, t)."""

    v1: float
    v2: float
    x1: float
    x2: float
    x: float
    t: float

    def __post_init__(self):
        if not (self.v1 <= self.v2):
            raise ValidationError("need v1 <= v2")
        if not (self.x1 <= self.x2):
            raise ValidationError("need x1 <= x2")
        if self.t == 0:
            raise DomainError("cone frame requires t != 0")

    @cached_property
    def xi(self):
        return -self.x / (4.0 * self.t)

    @property
    def eta(self):
        return 1 if self.t > 0 else -1

    @property
    def interval(self):
        """Visible interval I = [-v2/4, -v1/4] of soliton spectral abscissae."""
        return (-self.v2 / 4.0, -self.v1 / 4.0)

    def contains(self, x=None, t=None):
        x = self.x if x is None else x
        t = self.t if t is None else t
        lo, hi = sorted((x - self.v1 * t, x - self.v2 * t))
        return lo <= self.x2 and hi >= self.x1

    # membership of a real abscissa in the oriented half lines I_{xi,eta}^-/+
    def in_I_minus(self, re_lam):
        return self.eta * np.asarray(re_lam) <= self.eta * self.xi

    def in_interval(self, re_lam):
        lo, hi = self.interval
        return (lo <= np.asarray(re_lam)) & (np.asarray(re_lam) <= hi)

    def excluded_poles(self, discrete):
        """Discrete pairs with Re lambda_k in I^-_{xi,eta} but not in I;
        these feed the Blaschke, phi and alpha0 factors."""
        out = []
        for p in discrete:
            u = p.lam.real
            if self.in_I_minus(u) and not self.in_interval(u):
                out.append(p)
        return tuple(out)

    def visible_poles(self, discrete):
        return tuple(p for p in discrete if self.in_interval(p.lam.real))
