"""Desk-scale verification experiments behind `dnls-lab verify` and the
acceptance suite.

Each check returns (ok, metrics) where metrics is a flat dict of the
measured numbers; thresholds follow the quantitative targets of this
laboratory and are owned here so the CLI and the tests agree exactly.
"""

import os

import numpy as np

from .asymptotics import (
    A_coefficients,
    f_correction,
    phase_shifts,
    plancherel_check,
    q_asymptotic,
    trace_alpha_breve,
)
from .frames import ConeFrame
from .grids import DiscretePair, FieldGrid, ScatteringData
from .pde import default_dt, solve
from .scattering import alpha_breve, scatter
from .solitons import (
    modulate_coefficients,
    one_soliton_closed_form,
    one_soliton_from_phases,
    q_sol,
    solve_reflectionless,
)


def seeded_rng():
    return np.random.default_rng(int(os.environ.get("DNLS_LAB_SEED", "20260810")))


def c_for_centre(lam, centre, phase=0.0):
    """Norming constant placing the one-soliton envelope centre at `centre`."""
    v = lam.imag
    return np.sqrt(4.0 * v * v * np.exp(4.0 * v * centre) / abs(lam)) * np.exp(1j * phase)


def field_on_grid(values_fn, lo, hi, n, eps=1, whole_line=True):
    x = np.linspace(lo, hi, n)
    return FieldGrid(eps, float(x[0]), float(x[1] - x[0]), values_fn(x), whole_line), x


# ---------------------------------------------------------------------------
# round trip
# ---------------------------------------------------------------------------


def verify_roundtrip(eps=1, n=20001, span=90.0):
    """scatter(reconstruct(D)) on reflectionless data with N in {1, 2, 3}."""
    datasets = {
        1: (DiscretePair(0.5 + 0.8j, 1.2 - 0.3j),),
        2: (DiscretePair(1 + 1j, c_for_centre(1 + 1j, -4.0, 0.7)),
            DiscretePair(-1 + 1j, c_for_centre(-1 + 1j, 4.0, -1.1))),
        3: (DiscretePair(1.2 + 0.9j, c_for_centre(1.2 + 0.9j, -3.5, 0.7)),
            DiscretePair(0.1 + 1.3j, c_for_centre(0.1 + 1.3j, 0.0, 2.0)),
            DiscretePair(-0.9 + 0.7j, c_for_centre(-0.9 + 0.7j, 3.5, -0.4))),
    }
    worst = {"lam": 0.0, "c": 0.0, "rho": 0.0}
    for n_sol, pairs in datasets.items():
        x = np.linspace(-span / 2, span / 2, n)
        f = q_sol(pairs, x, 0.0, eps=eps)
        f = FieldGrid(eps, f.x0, f.dx, f.values, whole_line=True)
        d = scatter(f, (-2.5, 2.5, 0.3, 2.2), np.linspace(-3.0, 3.0, 121))
        got = sorted(d.discrete, key=lambda p: p.lam.real)
        ref = sorted(pairs, key=lambda p: p.lam.real)
        if len(got) != n_sol:
            return False, {"error": f"N={n_sol}: found {len(got)} eigenvalues"}
        for p, r in zip(got, ref):
            worst["lam"] = max(worst["lam"], abs(p.lam - r.lam))
            worst["c"] = max(worst["c"], abs(p.c - r.c) / abs(r.c))
        worst["rho"] = max(worst["rho"], float(np.max(np.abs(d.rho))))
    ok = worst["lam"] <= 1e-6 and worst["c"] <= 1e-5 and worst["rho"] <= 1e-6
    return ok, worst


# ---------------------------------------------------------------------------
# trace formula and Plancherel
# ---------------------------------------------------------------------------


def _composite_field_and_data(eps=1):
    """One soliton plus smooth radiation, scattered to data.  The spectral
    grid is kept wide: the soliton-radiation interaction gives rho tails
    that decay only like exp(-pi |lambda| / (4 Im lambda_1))."""
    pair = DiscretePair(0.3 + 0.9j, 1.1 + 0.4j)

    def values(x):
        sol = q_sol((pair,), x, 0.0, eps=eps).values
        return sol + 0.12 * np.exp(-((x - 1.0) ** 2) / 6.0) * np.exp(0.4j * x)

    f, _ = field_on_grid(values, -45.0, 45.0, 20001, eps=eps)
    d = scatter(f, (-2.0, 2.0, 0.3, 1.8), np.linspace(-9.0, 9.0, 721))
    return f, d


def verify_trace(eps=1):
    """ODE transmission coefficient against the trace-formula product at
    complex points, for a pure Gaussian and for a soliton+radiation field."""
    worst = 0.0

    def gauss(x):
        return 0.35 * np.exp(-x * x / 4.0) * np.exp(0.2j * x)

    f, _ = field_on_grid(gauss, -30.0, 30.0, 12001, eps=eps)
    d = scatter(f, (-2.0, 2.0, 0.3, 1.5), np.linspace(-4.0, 4.0, 321))
    pts = [0.5 + 0.5j, -0.8 + 0.3j, 1.5 + 1.0j, 0.1 + 2.0j, -1.2 + 0.7j,
           2.5 + 0.2j, 0.4 + 1e-6j, -0.6 + 1e-6j, 3.0 + 1.5j, -2.0 + 1.0j]
    for lam in pts:
        ode = alpha_breve(f, lam)
        formula = trace_alpha_breve(d, lam, "breve")
        worst = max(worst, abs(ode - formula) / abs(ode))
    f2, d2 = _composite_field_and_data(eps)
    for lam in pts:
        ode = alpha_breve(f2, lam)
        formula = trace_alpha_breve(d2, lam, "breve")
        worst = max(worst, abs(ode - formula) / abs(ode))
    return worst <= 1e-6, {"rel": worst}


def verify_plancherel(eps=1):
    """Defect of the weak Plancherel identity for the unit soliton (exact
    closed form on both sides) and for generic scattered data."""
    f, x = field_on_grid(lambda x: one_soliton_closed_form(1j, 2j, x, 0.0, eps), -30.0, 30.0, 12001, eps=eps)
    d = ScatteringData(eps, -4.0, 4.0, np.zeros(64), (DiscretePair(1j, 2j),))
    lhs, rhs, defect_sol = plancherel_check(f, d)
    f2, d2 = _composite_field_and_data(eps)
    _, _, defect_gen = plancherel_check(f2, d2)
    ok = defect_sol <= 1e-8 and defect_gen <= 1e-6
    return ok, {"soliton": defect_sol, "generic": defect_gen,
                "lhs": (lhs.real, lhs.imag), "rhs": (rhs.real, rhs.imag)}


# ---------------------------------------------------------------------------
# phase shifts by peak tracking
# ---------------------------------------------------------------------------


def _track_peak(x, amp, centre_guess, half_width):
    sel = (x > centre_guess - half_width) & (x < centre_guess + half_width)
    idx = np.nonzero(sel)[0]
    k = idx[np.argmax(amp[idx])]
    # quadratic sub-grid refinement
    y0, y1, y2 = amp[k - 1], amp[k], amp[k + 1]
    shift = 0.5 * (y0 - y2) / (y0 - 2.0 * y1 + y2)
    return x[k] + shift * (x[1] - x[0]), k


def verify_shifts(eps=1, t_obs=60.0):
    """Peak-tracked centre and phase shifts of the reflectionless 2-soliton
    {1+i, -1+i} against the explicit totals."""
    pairs = (DiscretePair(1 + 1j, c_for_centre(1 + 1j, 0.0, 0.4)),
             DiscretePair(-1 + 1j, c_for_centre(-1 + 1j, 0.0, -0.9)))
    d = ScatteringData(eps, -4.0, 4.0, np.zeros(64), pairs)
    shifts = phase_shifts(d)
    metrics = {}
    ok = True
    x = np.arange(-4.0 * t_obs - 40.0, 4.0 * t_obs + 40.0, 0.02)
    fields = {s: q_sol(pairs, x, s * t_obs, eps=eps).values for s in (+1, -1)}
    for k, sh in enumerate(shifts):
        u = sh.lam.real
        centres = {}
        phases = {}
        for s in (+1, -1):
            amp = np.abs(fields[s])
            guess = sh.x_plus if s > 0 else sh.x_minus
            centre, idx = _track_peak(x, amp, guess - 4.0 * u * s * t_obs, 25.0)
            centres[s] = centre + 4.0 * u * s * t_obs
            # phase offset against the zero-phase model at the tracked centre,
            # averaged over a few nodes around the peak
            sel = slice(idx - 4, idx + 5)
            model = one_soliton_from_phases(sh.lam, centres[s], 0.0, x[sel], s * t_obs, eps)
            ratio = fields[s][sel] / model
            phases[s] = np.angle(np.mean(ratio / np.abs(ratio)))
        dx_meas = centres[+1] - centres[-1]
        dphi_meas = -_wrap(phases[+1] - phases[-1])
        err_x = abs(dx_meas - sh.dx)
        err_phi = abs(_wrap(dphi_meas - sh.dphi))
        metrics[f"dx{k}"] = err_x
        metrics[f"dphi{k}"] = err_phi
        ok = ok and err_x <= 2e-2 and err_phi <= 5e-2
    return ok, metrics


def _wrap(a):
    return float(np.mod(a + np.pi, 2.0 * np.pi) - np.pi)


# ---------------------------------------------------------------------------
# soliton-resolution rate against the time-stepper
# ---------------------------------------------------------------------------


def rate_experiment(eps=1, n=4096, span=400.0, dt=1e-3, times=(20.0, 40.0, 80.0, 160.0),
                    slice_points=160):
    """Two solitons plus weak radiation; measures the cone-slice residual of
    the leading-plus-correction asymptotics against the time stepper.  The
    cone is generous enough that the radiation-shifted eigenvalues stay
    inside the visible interval."""
    pairs = (DiscretePair(0.7j, c_for_centre(0.7j, 0.0, 0.3)),
             DiscretePair(0.1 + 0.8j, c_for_centre(0.1 + 0.8j, 3.0, -0.5)))

    def values(x):
        sol = q_sol(pairs, x, 0.0, eps=eps).values
        return sol + 0.1 * np.exp(-((x + 2.0) / 3.0) ** 2) * np.exp(0.15j * x)

    f, x = field_on_grid(values, -span / 2, span / 2, n, eps=eps, whole_line=False)
    # scattering data from a dense resampling of the same initial values:
    # eigenvalue errors rotate the model phases linearly in t, so the map
    # needs dx ~ 4e-3 to keep them harmless out to the last sample time
    f_dense, _ = field_on_grid(values, -span / 2, span / 2, 96001, eps=eps)
    d = scatter(f_dense, (-1.5, 1.5, 0.25, 1.6), np.linspace(-4.0, 4.0, 321))
    states = solve(f, max(times), dt=dt, samples=times)
    v1, v2, x1, x2 = -1.2, 1.2, -2.0, 2.0
    residuals = []
    for st in states:
        if st.t == 0.0 or st.t not in times:
            continue
        t = st.t
        # evaluate on stepper grid nodes inside the slice: no interpolation
        sel = np.nonzero((x >= v1 * t + x1) & (x <= v2 * t + x2))[0]
        sel = sel[:: max(1, sel.size // slice_points)]
        worst = 0.0
        for idx in sel:
            frame = ConeFrame(v1, v2, x1, x2, x=float(x[idx]), t=t)
            prof = q_asymptotic(frame, d)
            worst = max(worst, abs(st.field.values[idx] - prof.value))
        residuals.append((t, worst))
    ts = np.array([r[0] for r in residuals])
    rs = np.array([r[1] for r in residuals])
    slope = -np.polyfit(np.log(ts), np.log(rs), 1)[0]
    return slope, residuals


def verify_rate(**kw):
    slope, residuals = rate_experiment(**kw)
    return slope >= 0.6, {"slope": slope, "residuals": residuals}


# ---------------------------------------------------------------------------
# asymptotic stability of the 2-soliton
# ---------------------------------------------------------------------------


def _h22_norm(grid_x, vals):
    dx = grid_x[1] - grid_x[0]
    w = (1.0 + grid_x ** 2)
    d2 = np.gradient(np.gradient(vals, dx), dx)
    return float(np.sqrt(np.sum((np.abs(w * vals) ** 2 + np.abs(d2) ** 2)) * dx))


def _data_distance(d, ref_pairs):
    got = sorted(d.discrete, key=lambda p: p.lam.real)
    ref = sorted(ref_pairs, key=lambda p: p.lam.real)
    if len(got) != len(ref):
        return np.inf
    dist = sum(abs(p.lam - r.lam) + abs(p.c - r.c) for p, r in zip(got, ref))
    grid = d.lambda_grid
    rho_h22 = _h22_norm(grid, d.rho)
    return float(dist + rho_h22)


def stability_experiment(eps=1, eta1=0.05, t_obs=80.0, n=4096, span=240.0, dt=1.5e-3):
    """Perturb an exact 2-soliton, measure the scattering-data response and
    the sup-distance at t_obs to the fitted sum of one-solitons."""
    pairs = (DiscretePair(-0.15 + 0.75j, c_for_centre(-0.15 + 0.75j, -2.0, 0.5)),
             DiscretePair(0.2 + 0.9j, c_for_centre(0.2 + 0.9j, 2.0, -0.7)))

    def bump(x, size):
        b = np.exp(-x * x / 2.0) * np.exp(0.3j * x)
        return size * b / _h22_norm(x, b)

    ks = {}
    for size in (eta1, eta1 / 2.0):
        def values(x, size=size):
            return q_sol(pairs, x, 0.0, eps=eps).values + bump(x, size)

        f, x = field_on_grid(values, -span / 2, span / 2, 16001, eps=eps, whole_line=False)
        fw = FieldGrid(eps, f.x0, f.dx, f.values, whole_line=True)
        d = scatter(fw, (-1.5, 1.5, 0.25, 1.6), np.linspace(-4.0, 4.0, 321))
        ks[size] = _data_distance(d, pairs) / size
        if size == eta1:
            d_pert = d

    # evolve the perturbed field and compare to the fitted one-soliton sum
    def values(x):
        return q_sol(pairs, x, 0.0, eps=eps).values + bump(x, eta1)

    f, x = field_on_grid(values, -span / 2, span / 2, n, eps=eps, whole_line=False)
    states = solve(f, t_obs, dt=dt, samples=[t_obs])
    q_num = states[-1].field.values
    shifts = phase_shifts(d_pert)
    fit = np.zeros_like(q_num)
    for sh in shifts:
        fit += one_soliton_from_phases(sh.lam, sh.x_plus, sh.phi_plus, x, t_obs, eps)
    sup = float(np.max(np.abs(q_num - fit)))
    k_meas = ks[eta1]
    bound = 3.0 * k_meas * eta1 / np.sqrt(t_obs)
    ratio = ks[eta1 / 2.0] / ks[eta1]
    return {
        "K": k_meas,
        "K_half": ks[eta1 / 2.0],
        "K_ratio": ratio,
        "sup": sup,
        "bound": bound,
    }


def verify_stability(**kw):
    m = stability_experiment(**kw)
    ok = np.isfinite(m["K"]) and 0.3 <= m["K_ratio"] <= 3.0 and m["sup"] <= m["bound"]
    return ok, m


CHECKS = {
    "roundtrip": verify_roundtrip,
    "trace": verify_trace,
    "plancherel": verify_plancherel,
    "shifts": verify_shifts,
    "rate": verify_rate,
    "stability": verify_stability,
}


def run_checks(names, eps=1):
    results = {}
    ok_all = True
    for name in names:
        fn = CHECKS[name]
        try:
            ok, metrics = fn(eps=eps)
        except TypeError:
            ok, metrics = fn()
        results[name] = (ok, metrics)
        ok_all = ok_all and ok
    return ok_all, results
