import numpy as np
import pytest

from dnlslab.errors import DomainError, ValidationError
from dnlslab.frames import ConeFrame, xi_eta
from dnlslab.grids import DiscretePair


class TestXiEta:
    def test_interior(self):
        xi, eta = xi_eta(-4.0, 2.0)
        assert xi == 0.5 and eta == 1
        xi, eta = xi_eta(-4.0, -2.0)
        assert xi == -0.5 and eta == -1

    def test_time_zero_limits(self):
        assert xi_eta(-1.0, 0.0)[0] == np.inf
        assert xi_eta(1.0, 0.0)[0] == -np.inf


class TestConeFrame:
    def make(self, x=2.0, t=4.0):
        return ConeFrame(-2.0, 1.0, -1.0, 1.0, x=x, t=t)

    def test_derived(self):
        fr = self.make()
        assert fr.xi == pytest.approx(-2.0 / 16.0)
        assert fr.eta == 1
        assert fr.interval == (-0.25, 0.5)

    def test_validation(self):
        with pytest.raises(ValidationError):
            ConeFrame(1.0, -1.0, 0.0, 0.0, x=0.0, t=1.0)
        with pytest.raises(DomainError):
            ConeFrame(-1.0, 1.0, 0.0, 0.0, x=0.0, t=0.0)

    def test_containment(self):
        fr = self.make(x=0.5, t=4.0)        # x-vt meets [-1,1] for v in [-2,1]
        assert fr.contains()
        assert not fr.contains(x=50.0)
        assert ConeFrame(-2.0, 1.0, -1.0, 1.0, x=-0.5, t=-4.0).contains()

    def test_half_line_membership(self):
        fr = self.make(x=2.0, t=4.0)        # xi = -0.125, eta = +1
        assert fr.in_I_minus(-3.0)
        assert not fr.in_I_minus(0.0)
        fr_neg = ConeFrame(-2.0, 1.0, -1.0, 1.0, x=-2.0, t=-4.0)  # xi=-0.125, eta=-1
        assert fr_neg.in_I_minus(0.0)
        assert not fr_neg.in_I_minus(-3.0)

    def test_pole_partition(self):
        pairs = (DiscretePair(-0.2 + 1j, 1.0),   # inside I = [-0.25, 0.5]
                 DiscretePair(-2.0 + 1j, 1.0),   # in I^- but left of I
                 DiscretePair(3.0 + 1j, 1.0))    # right of xi: not in I^-
        fr = self.make(x=2.0, t=4.0)
        assert fr.visible_poles(pairs) == (pairs[0],)
        assert fr.excluded_poles(pairs) == (pairs[1],)
