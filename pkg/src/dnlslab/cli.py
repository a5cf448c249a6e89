"""Command-line front end: scatter -> evolve -> reconstruct/asymptote ->
verify, emitting CSV/JSON plot data.

Exit codes: 0 success, 1 validation error, 2 numerical failure.  All
numeric output is deterministic for a fixed configuration and --threads 1.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import verify as verify_mod
from .asymptotics import phase_shifts, q_asymptotic, u_asymptotic
from .errors import NumericalError, ValidationError
from .evolution import evolve
from .frames import ConeFrame
from .grids import (
    FieldGrid,
    deserialize_field,
    deserialize_scattering,
    field_to_csv,
    serialize,
)
from .pde import default_dt, snapshot_manifest, solve
from .scattering import scatter
from .solitons import q_sol


def _floats(text, n=None, name="list"):
    try:
        vals = [float(v) for v in text.split(",")]
    except Exception:
        raise ValidationError(f"could not parse {name} {text!r}")
    if n is not None and len(vals) != n:
        raise ValidationError(f"{name} needs {n} comma-separated values, got {len(vals)}")
    return vals


def _load_field(path):
    with open(path, "rb") as fh:
        return deserialize_field(fh.read())


def _load_data(path):
    with open(path, "rb") as fh:
        return deserialize_scattering(fh.read())


def _write(path, payload):
    mode = "wb" if isinstance(payload, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(payload)


def _parallel_map(fn, items, threads):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def cmd_scatter(args):
    field = _load_field(args.input)
    lo, hi, m = _floats(args.lambda_grid, 3, "--lambda-grid")
    box = _floats(args.box, 4, "--box")
    data = scatter(field, tuple(box), np.linspace(lo, hi, int(m)))
    _write(args.out, serialize(data))
    return 0


def cmd_evolve(args):
    data = _load_data(args.input)
    times = _floats(args.times, name="--times")
    if len(times) != 1:
        raise ValidationError("evolve takes a single --times value")
    _write(args.out, serialize(evolve(data, times[0])))
    return 0


def cmd_reconstruct(args):
    data = _load_data(args.input)
    if data.t_stamp != 0.0:
        # fold the stamp back to reconstruction time; the solver carries
        # the full space-time dressing itself
        data_t = data.t_stamp
        data0 = evolve(data, -data_t)
    else:
        data_t, data0 = 0.0, data
    times = _floats(args.times, name="--times") if args.times else [data_t]
    x0, x1, n = _floats(args.grid, 3, "--grid")
    xs = np.linspace(x0, x1, int(n))
    rows = ["t,x,re,im"]
    for t in times:
        chunks = np.array_split(np.arange(xs.size), max(1, args.threads))
        vals = np.concatenate(
            _parallel_map(lambda idx: q_sol(data0.discrete, xs[idx], t, eps=data0.eps).values,
                          [c for c in chunks if c.size], args.threads)
        )
        rows.extend(f"{t!r},{x!r},{v.real!r},{v.imag!r}" for x, v in zip(xs, vals))
    _write(args.out, "\n".join(rows) + "\n")
    return 0


def cmd_asymptote(args):
    data = _load_data(args.input)
    v1, v2, x1, x2 = _floats(args.cone, 4, "--cone")
    times = _floats(args.times, name="--times")
    rows = ["t,x,re_leading,im_leading,re_correction,im_correction,branch"]
    for t in times:
        lo = min(v1 * t, v2 * t) + x1
        hi = max(v1 * t, v2 * t) + x2
        xs = np.linspace(lo, hi, args.slice_points)

        def one(xv):
            frame = ConeFrame(v1, v2, x1, x2, x=float(xv), t=t)
            if args.which == "q":
                return q_asymptotic(frame, data)
            return u_asymptotic(frame, data, big_m=args.bigM)

        profs = _parallel_map(one, list(xs), args.threads)
        for xv, p in zip(xs, profs):
            rows.append(
                f"{t!r},{float(xv)!r},{p.leading.real!r},{p.leading.imag!r},"
                f"{p.correction.real!r},{p.correction.imag!r},{p.branch}"
            )
    _write(args.out, "\n".join(rows) + "\n")
    return 0


def cmd_pde(args):
    field = _load_field(args.input)
    times = sorted(_floats(args.times, name="--times"))
    dt = args.dt if args.dt else default_dt(field.dx)
    states = solve(field, times[-1], dt=dt, samples=times)
    for k, st in enumerate(states):
        _write(f"{args.out}_t{k}.csv", field_to_csv(st.field))
    _write(f"{args.out}_manifest.json", json.dumps(snapshot_manifest(states)))
    return 0


def cmd_phase_shifts(args):
    data = _load_data(args.input)
    shifts = phase_shifts(data)
    doc = [
        {
            "lambda_re": s.lam.real, "lambda_im": s.lam.imag,
            "x_plus": s.x_plus, "x_minus": s.x_minus,
            "phi_plus": s.phi_plus, "phi_minus": s.phi_minus,
            "dx": s.dx, "dphi": s.dphi,
        }
        for s in shifts
    ]
    payload = json.dumps(doc, allow_nan=False)
    if args.out:
        _write(args.out, payload)
    else:
        print(payload)
    return 0


def cmd_verify(args):
    names = list(verify_mod.CHECKS) if args.check == "all" else [args.check]
    ok_all, results = verify_mod.run_checks(names, eps=args.eps)
    for name, (ok, metrics) in results.items():
        status = "PASS" if ok else "FAIL"
        detail = ", ".join(f"{k}={v}" for k, v in metrics.items() if not isinstance(v, list))
        print(f"{status} {name}: {detail}")
    if not ok_all:
        raise NumericalError("one or more verification checks failed")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="dnls-lab")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--input", required=True)
        p.add_argument("--out", required=out_required)
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("scatter", help="field -> scattering data")
    common(p)
    p.add_argument("--lambda-grid", required=True, help="lo,hi,m")
    p.add_argument("--box", required=True, help="re1,re2,im1,im2")
    p.set_defaults(fn=cmd_scatter)

    p = sub.add_parser("evolve", help="flow scattering data by t")
    common(p)
    p.add_argument("--times", required=True)
    p.set_defaults(fn=cmd_evolve)

    p = sub.add_parser("reconstruct", help="scattering data -> field CSV")
    common(p)
    p.add_argument("--grid", default="-40,40,2001", help="x0,x1,n")
    p.add_argument("--times", default=None)
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("asymptote", help="cone asymptotics -> CSV")
    p.add_argument("which", choices=["q", "u"])
    common(p)
    p.add_argument("--cone", required=True, help="v1,v2,x1,x2")
    p.add_argument("--times", required=True)
    p.add_argument("--bigM", type=float, default=1.0)
    p.add_argument("--slice-points", type=int, default=101)
    p.set_defaults(fn=cmd_asymptote)

    p = sub.add_parser("pde", help="time-stepper snapshots -> CSV/JSON")
    common(p)
    p.add_argument("--times", required=True)
    p.add_argument("--dt", type=float, default=None)
    p.set_defaults(fn=cmd_pde)

    p = sub.add_parser("phase-shifts", help="per-soliton asymptotic shifts")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_phase_shifts)

    p = sub.add_parser("verify", help="run verification experiments")
    p.add_argument("check", choices=sorted(verify_mod.CHECKS) + ["all"])
    p.add_argument("--eps", type=int, default=1, choices=[-1, 1])
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(fn=cmd_verify)

    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
