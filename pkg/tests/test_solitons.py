import numpy as np
import pytest
from scipy.integrate import quad

from dnlslab.errors import ConditioningError, DomainError, ValidationError
from dnlslab.evolution import theta
from dnlslab.frames import ConeFrame
from dnlslab.grids import DiscretePair, ScatteringData
from dnlslab.solitons import (
    NormalizationSet,
    blaschke,
    choose_normalization,
    cumulative_envelope_integral,
    modulate_coefficients,
    one_soliton_closed_form,
    one_soliton_from_phases,
    q_sol,
    residue_coefficients,
    row_matrix,
    solve_reflectionless,
)

PAIR_I = DiscretePair(1j, 2j)


class TestNormalization:
    def setup_method(self):
        self.pairs = (DiscretePair(-1 + 1j, 1.0), DiscretePair(1 + 1j, 1.0))

    def test_xi_below_all(self):
        assert choose_normalization(self.pairs, -5.0, 1).delta_set == frozenset()

    def test_xi_above_all(self):
        assert choose_normalization(self.pairs, 5.0, 1).delta_set == frozenset({0, 1})

    def test_negative_eta_complement(self):
        assert choose_normalization(self.pairs, 0.0, -1).delta_set == frozenset({1})

    def test_tie_goes_to_plus_set(self):
        assert 1 in choose_normalization(self.pairs, 1.0, 1).delta_set
        assert 1 not in choose_normalization(self.pairs, 1.0, -1).delta_set


class TestBlaschke:
    def test_empty_is_one(self):
        delta = NormalizationSet(frozenset(), (0,))
        assert blaschke(0.3 + 7j, delta, (PAIR_I,)) == 1.0

    def test_unit_modulus_on_axis(self):
        delta = NormalizationSet(frozenset({0, 1}), (0, 1))
        pairs = (DiscretePair(-1 + 1j, 1.0), DiscretePair(0.5 + 0.3j, 1.0))
        for lam in (-2.0, 0.1, 3.7):
            assert abs(abs(blaschke(lam, delta, pairs)) - 1.0) < 1e-14

    def test_normalized_at_infinity(self):
        delta = NormalizationSet(frozenset({0}), (0,))
        assert abs(blaschke(1e6j, delta, (PAIR_I,)) - 1.0) < 1e-5

    def test_pole_rejected(self):
        delta = NormalizationSet(frozenset({0}), (0,))
        with pytest.raises(DomainError):
            blaschke(1j, delta, (PAIR_I,))


class TestResidueCoefficients:
    def test_plain_at_origin(self):
        delta = NormalizationSet(frozenset(), (0,))
        out = residue_coefficients((PAIR_I,), delta, 0.0, 0.0)
        assert out[0][1] == "lower"
        assert out[0][2] == 2j

    def test_single_pole_value(self):
        # gamma = C exp(-2 i t theta(lambda)) at (x, t) = (0, 1)
        delta = NormalizationSet(frozenset(), (0,))
        got = residue_coefficients((PAIR_I,), delta, 0.0, 1.0)[0][2]
        want = 2j * np.exp(-2j * 1.0 * theta(0.0, 1.0, 1j))
        assert abs(got - want) < 1e-14
        assert abs(want - 2j * np.exp(-4j)) < 1e-14

    def test_cone_boundedness(self):
        pairs = (DiscretePair(-0.5 + 0.9j, 1.3), DiscretePair(0.8 + 0.7j, -0.4 + 1j))
        v = 0.6  # inside the cone of both velocities? no: pick xi fixed
        xi = 0.1
        k_ref = None
        for t in (1.0, 10.0, 100.0, 1000.0):
            x = -4.0 * xi * t
            delta = choose_normalization(pairs, xi, 1)
            gam = max(abs(g) for _, _, g in residue_coefficients(pairs, delta, x, t))
            if k_ref is None:
                k_ref = gam
            assert gam <= k_ref * (1.0 + 1e-9)

    def test_wrong_normalization_guard(self):
        pairs = (DiscretePair(1 + 1j, 1.0),)
        bad = NormalizationSet(frozenset({0}), (0,))  # growing choice for xi << Re
        with pytest.raises(ConditioningError):
            residue_coefficients(pairs, bad, -4.0 * (-3.0) * 40.0, 40.0)


class TestSolveReflectionless:
    def test_empty_data(self):
        sol = solve_reflectionless((), 0.3, 1.7, eval_points=[2.0 + 1j])
        assert sol.moment12 == 0
        assert np.allclose(sol.row_values[0], [1.0, 0.0])

    def test_unit_soliton_peak(self):
        sol = solve_reflectionless((PAIR_I,), 0.0, 0.0)
        assert abs(abs(sol.moment12) - np.sqrt(8.0)) < 1e-12
        assert abs(sol.moment12 - (2 + 2j)) < 1e-12

    @pytest.mark.parametrize("eps", [1, -1])
    def test_matches_closed_form(self, eps):
        lam, c = 0.6 + 0.85j, -0.9 + 1.4j
        x = np.linspace(-8, 8, 241)
        t = 0.9
        closed = one_soliton_closed_form(lam, c, x, t, eps)
        engine = np.array([solve_reflectionless((DiscretePair(lam, c),), xv, t, eps=eps).moment12 for xv in x])
        assert np.max(np.abs(engine - closed)) < 1e-11

    def test_symmetry_completion(self):
        # at a real spectral point the completed matrix has unit determinant
        pairs = (DiscretePair(0.4 + 1.1j, 1.0 + 0.3j), DiscretePair(-0.7 + 0.6j, 2.0))
        xi = 0.37
        sol = solve_reflectionless(pairs, 1.2, 2.1, eval_points=[xi])
        n1, n2 = sol.row_values[0]
        m = row_matrix(xi, n1, n2, 1)
        assert m[1, 0] == 1 * xi * np.conj(m[0, 1])
        assert abs(np.linalg.det(m) - 1.0) < 1e-10

    def test_normalization_consistency(self):
        # both admissible pole rewrites give the same un-normalized row
        pairs = (DiscretePair(-0.6 + 0.8j, 0.7 - 0.2j), DiscretePair(0.9 + 1.0j, 1.1j))
        x, t = 1.0, 3.0
        pts = [2.5, -1.4 + 0.5j, 0.2 + 2.2j]
        from dnlslab.frames import xi_eta
        from dnlslab.solitons import _row_eval, _solve_batch

        xi, eta = xi_eta(x, t)
        main = choose_normalization(pairs, xi, eta)
        alt = NormalizationSet(frozenset(range(2)) - main.delta_set, main.ordering)
        rows = []
        for delta in (main, alt):
            a, b, p1, p2, _ = _solve_batch(pairs, delta, [x], t, 1)
            n1, n2 = _row_eval(a, b, p1, p2, delta, pairs, np.array(pts))
            rows.append(np.stack([n1[0], n2[0]]))
        assert np.max(np.abs(rows[0] - rows[1])) < 1e-8

    def test_residual_recorded(self):
        sol = solve_reflectionless((PAIR_I,), 0.5, 0.5)
        assert sol.residual <= 1e-10


class TestClosedForm:
    def test_travel_velocity(self):
        lam, c = 1 + 1j, 2.0 + 0j
        x = np.linspace(-30, 10, 4001)
        for t in (0.0, 2.0):
            vals = np.abs(one_soliton_closed_form(lam, c, x, t, 1))
            peak = x[np.argmax(vals)]
            x0 = np.log(abs(lam) * abs(c) ** 2 / 4.0) / 4.0
            assert abs(peak - (x0 - 4.0 * t)) < 0.02

    def test_envelope_integral_against_quadrature(self):
        lam, eps = 0.7 + 0.9j, 1
        u, v = lam.real, lam.imag

        def envelope_sq(s):
            return 8 * v * v / (abs(lam) * np.cosh(4 * v * s) - eps * u)

        for y in (-1.0, 0.0, 2.3):
            num, _ = quad(envelope_sq, -40.0, y, epsabs=1e-12, epsrel=1e-12, limit=400)
            assert abs(num - cumulative_envelope_integral(lam, eps, y)) < 1e-10

    def test_from_phases_consistent(self):
        lam, c, eps = 0.5 + 0.7j, 1.3 - 0.4j, 1
        v = lam.imag
        x0 = np.log(abs(lam) * abs(c) ** 2 / (4 * v * v)) / (4 * v)
        phi0 = np.angle(lam) + np.angle(c) + np.pi / 2
        x = np.linspace(-5, 5, 101)
        a = one_soliton_closed_form(lam, c, x, 1.2, eps)
        b = one_soliton_from_phases(lam, x0, phi0, x, 1.2, eps)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_degenerate_guard(self):
        with pytest.raises(ValidationError):
            one_soliton_closed_form(1.0 + 0j, 1.0, 0.0, 0.0, 1)


class TestQSol:
    def test_zero_data(self):
        f = q_sol((), np.linspace(-5, 5, 64), 1.0)
        assert np.all(f.values == 0)

    def test_two_soliton_separation(self, two_soliton_pairs):
        # at |t| = 50 the field is a sum of shifted one-solitons
        from dnlslab.asymptotics import phase_shifts

        d = ScatteringData(1, -4.0, 4.0, np.zeros(64), two_soliton_pairs)
        shifts = phase_shifts(d)
        for t in (50.0, -50.0):
            lo = -4 * 1 * t - 30 if t > 0 else -4 * 1 * t - 30
            x = np.linspace(-abs(4 * t) - 30, abs(4 * t) + 30, 8001)
            field = q_sol(two_soliton_pairs, x, t).values
            fit = np.zeros_like(field)
            for sh in shifts:
                x0 = sh.x_plus if t > 0 else sh.x_minus
                ph = sh.phi_plus if t > 0 else sh.phi_minus
                fit += one_soliton_from_phases(sh.lam, x0, ph, x, t, 1)
            assert np.max(np.abs(field - fit)) < 1e-3

    def test_cone_separation_rate(self):
        # excluded-soliton influence decays exponentially at the rate set by
        # the pole gap and the spectral distance to the visible interval
        pairs = (DiscretePair(0.9j, 1.1 + 0.4j), DiscretePair(-1 + 0.8j, 0.6 - 1.0j))
        d_pairs_hat_frame = None
        circle = 3.0 * np.exp(2j * np.pi * np.arange(12) / 12)
        errs = []
        ts = (1.5, 2.0, 2.5, 3.0, 3.5)
        for t in ts:
            frame = ConeFrame(-0.8, 0.8, -1.0, 1.0, x=0.3, t=t)
            d = ScatteringData(1, -4.0, 4.0, np.zeros(64), pairs)
            hat = modulate_coefficients(d, frame, "hat")
            assert len(hat) == 1
            full = solve_reflectionless(pairs, 0.3, t, eval_points=circle)
            red = solve_reflectionless(hat, 0.3, t, eval_points=circle)
            excl = pairs[1].lam
            bl = (circle - np.conj(excl)) / (circle - excl)
            model = np.stack([red.row_values[:, 0] * bl, red.row_values[:, 1] / bl], axis=1)
            errs.append(np.max(np.abs(full.row_values - model)))
        lam_all = np.array([p.lam for p in pairs] + [np.conj(p.lam) for p in pairs])
        diff = np.abs(lam_all[:, None] - lam_all[None, :])
        diff[np.diag_indices_from(diff)] = np.inf
        d_lam = diff.min()
        nu0 = abs(-1.0 - (-0.2))  # distance of the excluded abscissa to I
        rate = -np.polyfit(ts, np.log(errs), 1)[0]
        assert rate >= 0.9 * 4.0 * d_lam * nu0


class TestModulate:
    def make_frame(self, xi=0.5, t=9.0):
        return ConeFrame(-1.2, 0.8, -1.0, 1.0, x=-4.0 * xi * t, t=t)

    def test_reflectionless_identity(self):
        pairs = (DiscretePair(0.1 + 1j, 1.5),)
        d = ScatteringData(1, -4.0, 4.0, np.zeros(64), pairs)
        frame = self.make_frame()
        assert modulate_coefficients(d, frame, "hat") == pairs
        assert modulate_coefficients(d, frame, "tilde") == pairs

    def test_tilde_equals_delta_square(self, smooth_data):
        from dnlslab.deltas import delta

        pairs = (DiscretePair(0.3 + 0.8j, 1.2 - 0.5j),)
        d = ScatteringData(1, smooth_data.lambda_lo, smooth_data.lambda_hi, smooth_data.rho, pairs)
        frame = self.make_frame()
        tilde = modulate_coefficients(d, frame, "tilde")[0]
        dval = delta(pairs[0].lam, frame, d)
        want = pairs[0].c * dval ** -2
        assert abs(tilde.c - want) < 1e-8 * abs(want)

    def test_hat_blaschke_square(self):
        # excluded pole contributes the squared pole ratio
        pairs = (DiscretePair(0.1 + 1j, 1.5), DiscretePair(-2 + 1j, 0.4j))
        d = ScatteringData(1, -4.0, 4.0, np.zeros(64), pairs)
        frame = self.make_frame(xi=0.0, t=9.0)
        hat = modulate_coefficients(d, frame, "hat")
        assert len(hat) == 1
        ratio = (pairs[0].lam - pairs[1].lam) / (pairs[0].lam - np.conj(pairs[1].lam))
        assert abs(hat[0].c - pairs[0].c * ratio ** 2) < 1e-12

    def test_unknown_variant(self):
        d = ScatteringData(1, -4.0, 4.0, np.zeros(64))
        with pytest.raises(ValidationError):
            modulate_coefficients(d, self.make_frame(), "nope")
