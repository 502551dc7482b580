"""Command-line front end.

Every subcommand writes its artifacts and a JSON report (library version,
config echo, residuals) atomically into the output directory, which defaults
to ``$RIEMANN_KDV_OUTPUT_DIR`` or the working directory.  Settings come from
built-in defaults, then an optional JSON config file, then explicit flags.

Exit codes: 0 success, 1 validation failure, 2 numerical-tolerance failure,
3 I/O failure.
"""
from __future__ import annotations

import os

# single-threaded BLAS keeps eigensolver output bit-reproducible across runs
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse  # noqa: E402
import csv  # noqa: E402
import io  # noqa: E402
import json  # noqa: E402
import sys  # noqa: E402

import numpy as np  # noqa: E402

from . import __version__  # noqa: E402
from .errors import NumericalToleranceError, RiemannKdVError, ValidationError  # noqa: E402

OUTPUT_ENV = "RIEMANN_KDV_OUTPUT_DIR"
EXIT_OK, EXIT_VALIDATION, EXIT_TOLERANCE, EXIT_IO = 0, 1, 2, 3


# formatting ----------------------------------------------------------------------

def g12(x) -> str:
    return f"{float(x):.12g}"


def clean(v):
    """JSON-ready copy with every float rounded to 12 significant digits."""
    if isinstance(v, dict):
        return {str(k): clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return clean(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return float(g12(x)) if np.isfinite(x) else str(x)
    if isinstance(v, (complex, np.complexfloating)):
        return [clean(v.real), clean(v.imag)]
    if v is None or isinstance(v, str):
        return v
    return str(v)


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def csv_text(header: list, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([g12(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


# parsing helpers ------------------------------------------------------------------

def floats(text) -> list:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from exc


def cnum(text) -> complex:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError as exc:
        raise ValidationError(f"expected a complex number such as 0.01 or 0.005+0.005j, got {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


# subcommands ----------------------------------------------------------------------
# each returns (report, artifacts {filename: text}, stdout text, ok)

def cmd_family(c):
    from .riemann_family import family_table
    ts = floats(c["t"])
    if any(t <= 0 for t in ts):
        raise ValidationError("t must be positive")
    rows = family_table(ts)
    text = csv_text(["t", "a_t", "e2", "h"], [[r["t"], r["a_t"], r["e2"], r["h"]] for r in rows])
    return {"rows": rows}, {"family.csv": text}, text, True


def cmd_mesh(c):
    from .riemann_family import horizontal_circle_residuals, mesh, reflection_defect
    fmt = c["format"]
    if fmt not in ("obj", "ply"):
        raise ValidationError("format must be obj or ply")
    hr = floats(c["height_range"]) if c["height_range"] is not None else None
    if hr is not None and len(hr) != 2:
        raise ValidationError("height-range takes two numbers")
    m = mesh(float(c["t"]), int(c["resolution"]), tuple(hr) if hr else None, c["end_clip"])
    circles = horizontal_circle_residuals(m)
    report = {"vertices": len(m.vertices), "faces": len(m.faces), "clipped": m.clipped,
              "reflection_defect": reflection_defect(m),
              "max_circle_residual": max((r for _, r in circles), default=0.0)}
    name = f"mesh.{fmt}"
    return report, {name: m.to_obj() if fmt == "obj" else m.to_ply()}, f"wrote {name}\n", True


def cmd_shiffman(c):
    from .riemann_family import gauss_map
    from .shiffman import perturbed_field, shiffman_csv, shiffman_grid
    t, n, eps = float(c["t"]), int(c["n"]), float(c["perturb"])
    if n < 2:
        raise ValidationError("n must be at least 2")
    g = gauss_map(t)
    x, y = np.arange(n) * t / n, np.arange(n) / n
    if eps:
        # a perturbed end is not planar and S has no limit there: sample the
        # band |Re z - t/4| <= t/8, which stays clear of the ends
        g = perturbed_field(g, eps, t / 4)
        x = np.linspace(t / 8, 3 * t / 8, n)
    S = shiffman_grid(g, x, y)
    sup = float(np.max(np.abs(S)))
    ok = eps != 0 or sup < float(c["tol"])
    return {"sup_abs_S": sup, "perturbed": eps != 0}, {"shiffman.csv": shiffman_csv(x, y, S)}, \
        f"sup|S| = {g12(sup)}\n", ok


def cmd_hierarchy(c):
    from .diffpoly import REFERENCE_FLOWS, REFERENCE_OPERATORS, check_commutativity, kdv_flow_rhs, kdv_operator
    n, fmt = int(c["n"]), c["format"]
    if n < 0:
        raise ValidationError("n must be non-negative")
    if fmt not in ("ascii", "latex"):
        raise ValidationError("format must be ascii or latex")
    render = (lambda p: p.to_latex()) if fmt == "latex" else (lambda p: p.to_ascii())
    lines = []
    for k in range(n + 1):
        lines.append(f"P_{k} = {render(kdv_operator(k))}" if fmt == "ascii"
                     else f"\\mathcal{{P}}_{{{k}}} = {render(kdv_operator(k))}")
    for k in range(n):
        lines.append(f"u_t{k} = {render(kdv_flow_rhs(k))}" if fmt == "ascii"
                     else f"u_{{t_{{{k}}}}} = {render(kdv_flow_rhs(k))}")
    text = "\n".join(lines) + "\n"
    ref_ops = all(kdv_operator(k) == REFERENCE_OPERATORS[k] for k in range(min(n, 3) + 1))
    ref_flows = all(kdv_flow_rhs(k) == REFERENCE_FLOWS[k] for k in range(min(n, 3)))
    report = {"operators_match_reference": ref_ops, "flows_match_reference": ref_flows}
    if c["commute"]:
        report["commutativity"] = {str(k): check_commutativity(k) for k in range(2, n + 1)}
    ok = ref_ops and ref_flows and all(report.get("commutativity", {}).values())
    return report, {f"hierarchy.{'tex' if fmt == 'latex' else 'txt'}": text}, text, ok


def cmd_kdv(c):
    from .kdv_flow import soliton_run
    if not c["soliton"]:
        raise ValidationError("choose initial data: only --soliton is available")
    run = soliton_run(float(c["L"]), float(c["T"]), int(c["n"]), float(c["dt"]), float(c["c"]))
    tr = run.trajectory
    I0 = tr.invariants[0]
    scale = np.where(np.abs(I0) > 0, np.abs(I0), 1.0)
    rows = [[float(tm), *(np.abs(I - I0) / scale)] for tm, I in zip(tr.times, tr.invariants)]
    text = csv_text(["time", "drift_mass", "drift_momentum", "drift_energy"], rows)
    drift = float(np.max(run.drift))
    ok = drift < float(c["tol"])
    return {"speed": run.speed, "max_drift": drift, "drift": run.drift}, {"kdv_drift.csv": text}, text, ok


def cmd_flow_shiffman(c):
    from .kdv_flow import integrate_shiffman
    res = integrate_shiffman(float(c["t"]), cnum(c["tau"]), int(c["order"]), dps=int(c["dps"]),
                             track=bool(c["track"]))
    report = res.report()
    report["flux"] = res.flux
    report["periods"] = list(res.periods)
    if res.track is not None:
        report["pole_z0"] = list(res.track.z0)
        report["a_minus2_defect"] = res.track.max_a2_defect()
    vals = res.g.values()
    rows = [[float(s), v.real, v.imag] for s, v in zip(res.g.s(), vals)]
    text = csv_text(["s", "re_g", "im_g"], rows)
    tol = float(c["tol"])
    ok = res.period_drift < tol and res.flux_drift < tol
    return report, {"flow_shiffman_g.csv": text}, \
        f"period drift {g12(res.period_drift)}, flux drift {g12(res.flux_drift)}\n", ok


def _potential(c, kind, n, **geom):
    from .kdv_flow import RiemannSource, elliptic_potential
    if c["source"] == "elliptic":
        return elliptic_potential(float(c["t"]), kind, n, int(c["dps"]), **geom)
    if c["source"] == "riemann":
        return RiemannSource(float(c["t"]), int(c["dps"])).u_field(kind, n, **geom)
    raise ValidationError("source must be elliptic or riemann")


def cmd_poles(c):
    from .kdv_flow import cross_times, taylor_flow, track_pole
    from .kdv_flow.integrate import nodes_for_circle
    t = float(c["t"])
    center = cnum(c["center"]) if c["center"] is not None else (
        0j if c["source"] == "elliptic" else complex(t, 1) / 2)
    radius = float(c["radius"]) if c["radius"] is not None else 0.2 * min(t, 1.0)
    n = int(c["n"]) if c["n"] else nodes_for_circle(radius, min(t, 1.0), int(c["dps"]))
    u0 = _potential(c, "circle", n, center=center, radius=radius)
    times = cross_times(cnum(c["tau"]), float(c["h"]))
    track = track_pole([taylor_flow(u0, s, int(c["order"])).u for s in times], times)
    a2 = track.max_a2_defect()
    report = {"center": center, "radius": radius, "n": n, "times": list(times), "z0": list(track.z0),
              "z0_moment": list(track.z0_moment), "a_minus2": list(track.a_minus2),
              "a_minus2_defect": a2, "route_defect": track.route_defect()}
    rows = [[s.real, s.imag, z.real, z.imag] for s, z in zip(times, track.z0)]
    text = csv_text(["re_t", "im_t", "re_z0", "im_z0"], rows)
    return report, {"poles.csv": text}, text, a2 < float(c["tol"])


def cmd_detect_ag(c):
    from .kdv_flow import detect_algebro_geometric
    x0 = float(c["x0"]) if c["x0"] is not None else float(c["t"]) / 4
    u = _potential(c, "vertical", int(c["n"]), x0=x0)
    d = detect_algebro_geometric(u, int(c["n_max"]), float(c["threshold"]))
    report = {"n": d.n, "coefficients": list(d.coefficients), "profile": list(d.profile)}
    return report, {}, f"algebro-geometric of order {d.n}\n" if d.n is not None else "not detected\n", \
        d.n is not None


def cmd_spectrum(c):
    from . import jacobi_spectral as js
    from .riemann_family import gauss_map
    if c["operator"] == "catenoid":
        op = js.catenoid_operator(float(c["T"]), float(c["h"]), int(c["n_theta"] or 16))
        rep = js.kernel_dimension(op, float(c["ratio"]), int(c["k"]))
    elif c["operator"] == "riemann":
        t = float(c["t"])
        g = gauss_map(t)
        op = js.field_operator(g, t, int(c["n_x"]), int(c["n_theta"] or 32))
        z = op.x[:, None] + 1j * op.y[None, :]
        rep = js.kernel_dimension(op, float(c["ratio"]), int(c["k"]),
                                  linear=js.linear_jacobi_fields(g, z))
    else:
        raise ValidationError("operator must be catenoid or riemann")
    report = rep.as_dict()
    return report, {}, f"kernel dimension {rep.dimension}, gap ratio {g12(rep.gap_ratio)}\n", True


def cmd_check(c):
    from .acceptance import CHECKS, run_all
    wanted = [int(v) for v in floats(c["criteria"])] if c["criteria"] else sorted(CHECKS)
    bad = [n for n in wanted if n not in CHECKS]
    if bad:
        raise ValidationError(f"unknown criteria {bad}; the reproducibility criterion compares two check reports")
    results = run_all(wanted)
    text = "".join(r.line() + "\n" for r in results)
    report = {"criteria": [r.as_dict() for r in results], "passed": all(r.passed for r in results)}
    return report, {"check.txt": text}, text, report["passed"]


COMMANDS = {
    "family": (cmd_family, {"t": "0.5,1,2"}),
    "mesh": (cmd_mesh, {"t": 1.0, "resolution": 24, "height_range": None, "end_clip": None,
                        "format": "obj"}),
    "shiffman": (cmd_shiffman, {"t": 1.0, "n": 64, "perturb": 0.0, "tol": 1e-8}),
    "hierarchy": (cmd_hierarchy, {"n": 3, "format": "ascii", "commute": False}),
    "kdv": (cmd_kdv, {"soliton": False, "L": 40.0, "T": 1.0, "n": 512, "dt": 1e-3, "c": 4.0,
                      "tol": 1e-6}),
    "flow-shiffman": (cmd_flow_shiffman, {"t": 1.0, "tau": "0.01", "order": 8, "dps": 80,
                                          "track": True, "tol": 1e-6}),
    "poles": (cmd_poles, {"source": "riemann", "t": 1.0, "tau": "0", "h": 0.01, "order": 8,
                          "center": None, "radius": None, "n": 0, "dps": 80, "tol": 1e-6}),
    "detect-ag": (cmd_detect_ag, {"source": "elliptic", "t": 1.0, "n": 256, "x0": None, "n_max": 6,
                                  "threshold": 1e-10, "dps": 80}),
    "spectrum": (cmd_spectrum, {"operator": "catenoid", "t": 1.0, "T": 2.0, "h": 0.01, "n_x": 64,
                                "n_theta": None, "k": 8, "ratio": 10.0}),
    "check": (cmd_check, {"criteria": None}),
}

_FLAGS = {
    "family": [("--t", "comma-separated torus widths")],
    "mesh": [("--t", "torus width"), ("--resolution", "grid nodes per unit length"),
             ("--height-range", "x3 range as lo,hi"), ("--end-clip", "clip radius around the ends"),
             ("--format", "obj or ply")],
    "shiffman": [("--t", "torus width"), ("--n", "grid nodes per direction"),
                 ("--perturb", "holomorphic perturbation size"), ("--tol", "bound on sup|S|")],
    "hierarchy": [("--n", "highest operator index"), ("--format", "ascii or latex"),
                  ("--commute", "also check commutativity", "flag")],
    "kdv": [("--soliton", "one-soliton initial data", "flag"), ("--L", "period"), ("--T", "final time"),
            ("--n", "grid size"), ("--dt", "time step"), ("--c", "soliton speed"),
            ("--tol", "bound on invariant drift")],
    "flow-shiffman": [("--t", "torus width"), ("--tau", "complex flow time"), ("--order", "Taylor order"),
                      ("--dps", "decimal digits"), ("--no-track", "skip the pole track", "off:track"),
                      ("--tol", "bound on period and flux drift")],
    "poles": [("--source", "elliptic or riemann"), ("--t", "torus width"), ("--tau", "complex base time"),
              ("--h", "stencil step"), ("--order", "Taylor order"), ("--center", "circle centre"),
              ("--radius", "circle radius"), ("--n", "contour nodes (0 chooses)"), ("--dps", "decimal digits"),
              ("--tol", "bound on the a_-2 defect")],
    "detect-ag": [("--source", "elliptic or riemann"), ("--t", "torus width"), ("--n", "contour nodes"),
                  ("--x0", "contour abscissa"), ("--n-max", "highest flow tried"),
                  ("--threshold", "relative residual threshold"), ("--dps", "decimal digits")],
    "spectrum": [("--operator", "catenoid or riemann"), ("--t", "torus width"), ("--T", "catenoid half-length"),
                 ("--h", "catenoid step"), ("--n-x", "axial nodes"), ("--n-theta", "angular nodes (16 for the catenoid, 32 otherwise)"),
                 ("--k", "eigenvalues computed"), ("--ratio", "gap ratio for the kernel count")],
    "check": [("--criteria", "comma-separated criterion numbers")],
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="riemann-kdv", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="JSON file of settings")
        sp.add_argument("--output-dir", default=None, help=f"defaults to ${OUTPUT_ENV} or .")
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="recorded for reproducibility; randomized checks are seeded internally")
        for entry in _FLAGS[name]:
            flag, help_ = entry[0], entry[1]
            kind = entry[2] if len(entry) > 2 else None
            if kind == "flag":
                sp.add_argument(flag, action="store_true", default=argparse.SUPPRESS, help=help_)
            elif kind and kind.startswith("off:"):
                sp.add_argument(flag, dest=kind[4:], action="store_false", default=argparse.SUPPRESS,
                                help=help_)
            else:
                sp.add_argument(flag, default=argparse.SUPPRESS, help=help_)
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the JSON file, then explicit flags."""
    fn, defaults = COMMANDS[args.command]
    cfg = dict(defaults)
    cfg["seed"] = 0
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except OSError:
            raise
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ValidationError("config file must hold a JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ValidationError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        cfg.update(file_cfg)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "output_dir")}
    cfg.update(flags)
    return cfg


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        outdir = args.output_dir or os.environ.get(OUTPUT_ENV) or "."
        fn = COMMANDS[args.command][0]
        try:
            report, artifacts, text, ok = fn(cfg)
        except (ValueError, TypeError) as exc:
            if isinstance(exc, RiemannKdVError):
                raise
            raise ValidationError(str(exc)) from exc
        full = {"command": args.command, "version": __version__, "config": cfg,
                "passed": bool(ok), "results": report}
        os.makedirs(outdir, exist_ok=True)
        for name, body in artifacts.items():
            write_atomic(os.path.join(outdir, name), body)
        write_atomic(os.path.join(outdir, f"{args.command}_report.json"), dumps(full))
        stdout.write(text)
        return EXIT_OK if ok else EXIT_TOLERANCE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalToleranceError as exc:
        print(f"numerical tolerance not met: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RiemannKdVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
