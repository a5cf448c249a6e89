import numpy as np
import pytest

from dnlslab.errors import ValidationError, WindingError
from dnlslab.frames import xi_eta
from dnlslab.grids import DiscretePair, FieldGrid, tail_integral
from dnlslab.scattering import (
    alpha_breve,
    find_eigenvalues,
    integrate_jost,
    norming_constant,
    reflection,
    scatter,
    transition_matrix,
)
from dnlslab.solitons import one_soliton_closed_form, q_sol
from dnlslab.verify import c_for_centre


def zero_field(n=64):
    return FieldGrid(1, -20.0, 40.0 / (n - 1), np.zeros(n))


def soliton_field(lam=1j, c=2j, span=60.0, n=6001, eps=1, t=0.0):
    x = np.linspace(-span / 2, span / 2, n)
    vals = one_soliton_closed_form(lam, c, x, t, eps)
    return FieldGrid(eps, float(x[0]), float(x[1] - x[0]), vals)


class TestJost:
    def test_zero_potential_identity(self):
        q = zero_field()
        for side in ("left", "right"):
            for lam in (0.3, 1.5j, 0.7 + 0.4j):
                n = integrate_jost(q, lam, side)
                assert np.max(np.abs(n - np.eye(2))) < 1e-12

    def test_unit_determinant(self, gaussian_field):
        n_minus = integrate_jost(gaussian_field, 0.3, "left")
        n_plus = integrate_jost(gaussian_field, 0.3, "right")
        for n in (n_minus, n_plus):
            assert abs(np.linalg.det(n) - 1.0) < 1e-9

    def test_zero_energy_closed_form(self, gaussian_field):
        # at lambda = 0 the system is triangular: N+_11 = exp((i eps/2) tail)
        q = gaussian_field
        n_plus = integrate_jost(q, 0.0, "right")
        x_m = 0.5 * (q.x0 + q.x_end)
        want = np.exp(0.5j * q.eps * tail_integral(q, x_m, "abs2"))
        assert abs(n_plus[1, 0]) == 0.0
        assert abs(n_plus[0, 0] - want) < 1e-7

    def test_side_validation(self, gaussian_field):
        with pytest.raises(ValidationError):
            integrate_jost(gaussian_field, 0.3, "up")
        with pytest.raises(ValidationError):
            integrate_jost(gaussian_field, -1j, "left")


class TestTransition:
    def test_zero_potential(self):
        e = transition_matrix(zero_field(), 0.7)
        assert e.alpha == 1 and e.alpha_breve == 1
        assert e.beta == 0 and e.beta_breve == 0

    def test_unit_determinant_identity(self, unit_soliton_field):
        e = transition_matrix(unit_soliton_field, 0.7)
        assert abs(e.alpha * e.alpha_breve - e.beta * e.beta_breve - 1.0) < 1e-8

    def test_real_axis_symmetries(self, gaussian_field):
        for lam in (-1.3, 0.4, 2.1):
            e = transition_matrix(gaussian_field, lam)
            assert abs(e.alpha_breve - np.conj(e.alpha)) < 1e-8
            assert abs(e.beta_breve - gaussian_field.eps * lam * np.conj(e.beta)) < 1e-8

    def test_soliton_is_reflectionless(self, unit_soliton_field):
        for lam in (-0.9, 0.3, 1.7):
            e = transition_matrix(unit_soliton_field, lam)
            assert abs(e.beta) < 1e-6


class TestReflection:
    def test_zero_potential(self):
        rho = reflection(zero_field(), np.linspace(-2, 2, 11))
        assert np.all(rho == 0)

    def test_born_approximation(self):
        x = np.linspace(-30, 30, 4001)
        qv = 1e-3 * np.exp(-x * x / 2) * np.exp(0.3j * x)
        q = FieldGrid(1, float(x[0]), float(x[1] - x[0]), qv)
        grid = np.linspace(-2, 2, 21)
        rho = reflection(q, grid)
        born = np.array([-np.trapezoid(qv * np.exp(2j * lam * x), x) for lam in grid])
        mask = np.abs(born) > 1e-6
        assert np.max(np.abs(rho - born)[mask] / np.abs(born)[mask]) < 0.05

    def test_positivity_identity(self, gaussian_field):
        from dnlslab.scattering import _engine, _transition_batch

        grid = np.linspace(-2, 2, 21)
        entries = _transition_batch(_engine(gaussian_field), grid)
        rho = np.array([e.beta / e.alpha for e in entries])
        lhs = 1.0 - gaussian_field.eps * grid * np.abs(rho) ** 2
        rhs = np.array([1.0 / abs(e.alpha) ** 2 for e in entries])
        assert np.max(np.abs(lhs - rhs)) < 1e-8


class TestAlphaBreve:
    def test_zero_potential(self):
        assert abs(alpha_breve(zero_field(), 0.5 + 0.5j) - 1.0) < 1e-12

    def test_soliton_trace_form(self, unit_soliton_field):
        for lam in (0.5 + 0.5j, -1.0 + 0.3j, 2j):
            got = alpha_breve(unit_soliton_field, lam)
            want = (lam - 1j) / (lam + 1j)
            assert abs(got - want) < 1e-6

    def test_large_imaginary_normalization(self):
        x = np.linspace(-20, 20, 2001)
        qv = 1e-3 * np.exp(-x * x)
        q = FieldGrid(1, float(x[0]), float(x[1] - x[0]), qv)
        assert abs(alpha_breve(q, 50j) - 1.0) < 1e-4


class TestEigenvalues:
    def test_zero_potential_empty(self):
        assert find_eigenvalues(zero_field(256), (-1, 1, 0.3, 1.5)) == []

    def test_one_soliton_recovery(self):
        q = soliton_field(lam=0.5 + 0.8j, c=1.3 - 0.2j)
        zeros = find_eigenvalues(q, (-1.5, 1.5, 0.3, 1.5))
        assert len(zeros) == 1
        assert abs(zeros[0] - (0.5 + 0.8j)) < 1e-6

    def test_two_soliton_recovery(self, two_soliton_pairs):
        x = np.linspace(-45, 45, 12001)
        f = q_sol(two_soliton_pairs, x, 0.0, eps=1)
        f = FieldGrid(1, f.x0, f.dx, f.values, whole_line=True)
        zeros = sorted(find_eigenvalues(f, (-2, 2, 0.3, 1.8)), key=lambda z: z.real)
        assert len(zeros) == 2
        assert abs(zeros[0] - (-1 + 1j)) < 1e-6
        assert abs(zeros[1] - (1 + 1j)) < 1e-6

    def test_box_validation(self, gaussian_field):
        with pytest.raises(ValidationError):
            find_eigenvalues(gaussian_field, (-1, 1, -0.5, 1.0))
        with pytest.raises(ValidationError):
            find_eigenvalues(gaussian_field, (1, -1, 0.3, 1.0))


class TestNormingConstant:
    def test_unit_soliton(self, unit_soliton_field):
        c = norming_constant(unit_soliton_field, 1j)
        assert abs(c - 2j) < 1e-6

    def test_shift_covariance(self):
        # q(x - s) multiplies the constant by exp(-2 i lambda s)
        lam, c0, s = 0.4 + 0.9j, 1.1 + 0.6j, 1.0
        x = np.linspace(-30, 30, 6001)
        base = FieldGrid(1, float(x[0]), float(x[1] - x[0]),
                         one_soliton_closed_form(lam, c0, x, 0.0, 1))
        shifted = FieldGrid(1, float(x[0]), float(x[1] - x[0]),
                            one_soliton_closed_form(lam, c0, x - s, 0.0, 1))
        c_base = norming_constant(base, lam)
        c_shift = norming_constant(shifted, lam)
        assert abs(c_shift / c_base - np.exp(-2j * lam * s)) < 1e-5

    def test_not_an_eigenvalue(self, unit_soliton_field):
        from dnlslab.errors import NotAnEigenvalueError

        with pytest.raises(NotAnEigenvalueError):
            norming_constant(unit_soliton_field, 0.4 + 0.7j)


class TestScatter:
    def test_zero_potential(self):
        d = scatter(zero_field(256), (-1, 1, 0.3, 1.5), np.linspace(-2, 2, 21))
        assert np.all(d.rho == 0)
        assert d.discrete == ()
        assert d.t_stamp == 0.0

    def test_small_gaussian_pure_radiation(self):
        x = np.linspace(-25, 25, 3001)
        qv = 0.2 * np.exp(-x * x / 2)
        q = FieldGrid(1, float(x[0]), float(x[1] - x[0]), qv)
        d = scatter(q, (-1.5, 1.5, 0.05, 1.5), np.linspace(-3, 3, 61))
        assert d.discrete == ()
        assert np.max(np.abs(d.rho)) > 0

    def test_soliton_round_trip(self):
        lam, c = 0.5 + 0.8j, 1.3 - 0.2j
        q = soliton_field(lam=lam, c=c)
        d = scatter(q, (-1.5, 1.5, 0.3, 1.5), np.linspace(-3, 3, 61))
        assert len(d.discrete) == 1
        assert abs(d.discrete[0].lam - lam) < 1e-6
        assert abs(d.discrete[0].c - c) < 1e-5
        assert np.max(np.abs(d.rho)) < 1e-6
