import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnlslab.errors import DomainError, ParseError, TailDecayError, ValidationError
from dnlslab.grids import (
    DiscretePair,
    FieldGrid,
    ScatteringData,
    deserialize,
    deserialize_field,
    deserialize_scattering,
    field_to_csv,
    gauge_forward,
    gauge_inverse,
    serialize,
    tail_integral,
)
from dnlslab.solitons import one_soliton_closed_form


def make_field(vals, eps=1, x0=-10.0, dx=0.1, whole_line=True):
    return FieldGrid(eps, x0, dx, np.asarray(vals, dtype=complex), whole_line)


class TestFieldGrid:
    def test_validation(self):
        with pytest.raises(ValidationError):
            make_field(np.zeros(8), eps=2)
        with pytest.raises(ValidationError):
            FieldGrid(1, 0.0, -0.1, np.zeros(8))
        with pytest.raises(ValidationError):
            FieldGrid(1, 0.0, 0.1, np.zeros(4))
        with pytest.raises(ValidationError):
            make_field([np.nan] * 8)

    def test_tail_decay_flag(self):
        vals = np.ones(16)
        with pytest.raises(TailDecayError):
            make_field(vals, whole_line=True)
        make_field(vals, whole_line=False)  # periodic-style grid is fine

    def test_grid_coordinates(self):
        f = make_field(np.zeros(11), x0=-1.0, dx=0.25)
        assert f.x[0] == -1.0
        assert f.x_end == pytest.approx(-1.0 + 0.25 * 10)


class TestGauge:
    def test_zero_field(self):
        f = make_field(np.zeros(64))
        assert np.all(gauge_forward(f).values == 0)
        assert np.all(gauge_inverse(f).values == 0)

    def test_modulus_preserved(self, rng):
        x = np.linspace(-12, 12, 1201)
        vals = (0.5 + 0.2j) * np.exp(-x * x / 3.0) * np.exp(0.4j * x)
        u = FieldGrid(1, -12.0, x[1] - x[0], vals)
        q = gauge_forward(u)
        assert np.max(np.abs(np.abs(q.values) - np.abs(u.values))) < 1e-14

    @pytest.mark.parametrize("eps", [1, -1])
    def test_round_trip_identity(self, eps):
        x = np.linspace(-25, 25, 4001)
        vals = one_soliton_closed_form(1j, 2j, x, 0.0, eps)
        u = FieldGrid(eps, float(x[0]), float(x[1] - x[0]), vals)
        back = gauge_inverse(gauge_forward(u))
        assert np.max(np.abs(back.values - u.values)) < 1e-10
        fwd = gauge_forward(gauge_inverse(u))
        assert np.max(np.abs(fwd.values - u.values)) < 1e-10

    def test_unit_soliton_left_phase(self, unit_soliton_field):
        # int of the unit-soliton envelope squared is 2*pi, so the gauge
        # phase winds a full turn at the far left of the grid
        u = gauge_inverse(unit_soliton_field)
        ratio = u.values[3] / unit_soliton_field.values[3]
        assert abs(ratio - np.exp(-2j * np.pi)) < 1e-8

    def test_requires_whole_line(self):
        f = make_field(np.ones(16), whole_line=False)
        with pytest.raises(TailDecayError):
            gauge_forward(f)


class TestTailIntegral:
    def test_zero(self):
        f = make_field(np.zeros(32))
        assert tail_integral(f, f.x0, "abs2") == 0

    def test_gaussian_mass(self):
        x = np.linspace(-10, 10, 4001)
        sigma = 0.5
        vals = np.exp(-x * x / (2 * sigma**2)) / np.sqrt(sigma * np.sqrt(np.pi) * 2 / np.sqrt(2))
        vals = vals / np.sqrt(np.sum(np.abs(vals) ** 2) * (x[1] - x[0]))  # unit L2 mass
        f = FieldGrid(1, -10.0, float(x[1] - x[0]), vals)
        assert abs(tail_integral(f, -9.0, "abs2") - 1.0) < 1e-6

    def test_right_endpoint(self):
        x = np.linspace(-10, 10, 201)
        vals = np.exp(-x * x)
        f = FieldGrid(1, -10.0, float(x[1] - x[0]), vals)
        assert tail_integral(f, f.x_end, "abs2") == 0

    def test_outside_grid(self):
        f = make_field(np.zeros(16))
        with pytest.raises(DomainError):
            tail_integral(f, f.x_end + 1.0, "abs2")

    def test_plain_weight_midpoint(self):
        x = np.linspace(-10, 10, 2001)
        vals = np.exp(-x * x) * (1 + 0.5j)
        f = FieldGrid(1, -10.0, float(x[1] - x[0]), vals)
        got = tail_integral(f, 0.0, "plain")
        assert abs(got - (1 + 0.5j) * np.sqrt(np.pi) / 2) < 1e-6


class TestScatteringData:
    def test_positivity_rejected(self):
        grid = np.linspace(-2, 2, 64)
        rho = np.full(64, 1.2 + 0j)
        from dnlslab.errors import SpectralSingularityError

        with pytest.raises(SpectralSingularityError):
            ScatteringData(1, -2.0, 2.0, rho)

    def test_rho_interpolation_and_clipping(self, smooth_data):
        d = smooth_data
        inside = d.rho_at(0.37)
        assert abs(inside) > 0
        assert d.rho_at(100.0) == 0
        node = d.lambda_grid[800]
        assert abs(d.rho_at(node) - d.rho[800]) < 1e-14

    def test_gap_invariant(self):
        pair = (DiscretePair(1j, 1.0), DiscretePair(0.5 + 1j, 2.0))
        d = ScatteringData(1, -2.0, 2.0, np.zeros(64), pair)
        assert d.d_lambda == pytest.approx(0.5)
        for p in pair:
            assert p.lam.imag >= d.d_lambda / 2

    def test_duplicate_eigenvalues_rejected(self):
        with pytest.raises(ValidationError):
            ScatteringData(1, -2.0, 2.0, np.zeros(64), (DiscretePair(1j, 1.0), DiscretePair(1j, 2.0)))


class TestSerialization:
    def test_field_round_trip_bitwise(self, unit_soliton_field):
        blob = serialize(unit_soliton_field)
        back = deserialize_field(blob)
        assert back.eps == unit_soliton_field.eps
        assert back.x0 == unit_soliton_field.x0
        assert back.dx == unit_soliton_field.dx
        assert np.array_equal(back.values, unit_soliton_field.values)
        assert serialize(back) == blob

    def test_scattering_round_trip_bitwise(self, smooth_data):
        d = ScatteringData(1, smooth_data.lambda_lo, smooth_data.lambda_hi,
                           smooth_data.rho, (DiscretePair(0.3 + 0.9j, 1.1 - 0.2j),), 1.5)
        blob = serialize(d)
        back = deserialize_scattering(blob)
        assert np.array_equal(back.rho, d.rho)
        assert back.discrete == d.discrete
        assert back.t_stamp == d.t_stamp
        assert serialize(back) == blob

    def test_deserialize_dispatch(self, unit_soliton_field, smooth_data):
        assert isinstance(deserialize(serialize(unit_soliton_field)), FieldGrid)
        assert isinstance(deserialize(serialize(smooth_data)), ScatteringData)

    def test_missing_key_named(self):
        doc = json.loads(serialize(FieldGrid(1, 0.0, 0.1, np.zeros(8))).decode())
        del doc["eps"]
        with pytest.raises(ParseError, match="eps"):
            deserialize_field(json.dumps(doc).encode())

    def test_unknown_key_named(self):
        doc = json.loads(serialize(FieldGrid(1, 0.0, 0.1, np.zeros(8))).decode())
        doc["bogus"] = 1
        with pytest.raises(ParseError, match="bogus"):
            deserialize_field(json.dumps(doc).encode())

    def test_bad_eps_rejected(self):
        doc = json.loads(serialize(FieldGrid(1, 0.0, 0.1, np.zeros(8))).decode())
        doc["eps"] = 3
        with pytest.raises(ValidationError):
            deserialize_field(json.dumps(doc).encode())

    def test_non_finite_rejected(self):
        blob = b'{"eps": 1, "x0": 0.0, "dx": 0.1, "re": [NaN,0,0,0,0,0,0,0], "im": [0,0,0,0,0,0,0,0], "whole_line": true}'
        with pytest.raises(ParseError):
            deserialize_field(blob)

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(st.lists(st.tuples(
        st.floats(-1e6, 1e6, allow_nan=False), st.floats(-1e6, 1e6, allow_nan=False)),
        min_size=8, max_size=24))
    def test_round_trip_property(self, pairs):
        vals = np.array([re + 1j * im for re, im in pairs])
        f = FieldGrid(1, -1.0, 0.25, vals, whole_line=False)
        back = deserialize_field(serialize(f))
        assert np.array_equal(back.values, f.values)

    def test_csv(self):
        f = FieldGrid(1, 0.0, 0.5, np.arange(8) * (1 + 1j), whole_line=False)
        lines = field_to_csv(f).strip().split("\n")
        assert lines[0] == "x,re,im"
        assert len(lines) == 9
        assert lines[1] == "0.0,0.0,0.0"
        assert lines[3].startswith("1.0,2.0,2.0")
