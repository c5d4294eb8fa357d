"""Command-line interface: ``filament-waves {cc,spectrum,branch,evolve,reconstruct}``.

Exit codes: 0 success, 1 usage, 2 infeasible or degenerate input, 3 numerical failure.
Relative output paths are resolved against ``$FILAMENT_WAVES_OUTDIR`` when it is set.
Every output carries the full settings: a ``settings`` key in JSON documents and a
leading ``# settings {...}`` line in CSV and JSON-lines streams.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .central import CC_TOL, MAX_ITER, CentralConfig, cc_residual, nested_polygon_seed, polygon_config, solve_cc
from .continuation import BranchPoint, ContinuationSettings, continue_branch, full_space_residual, verify_asymptotics
from .errors import (
    CollisionError,
    ContinuationError,
    DegenerateError,
    DivergenceError,
    DomainError,
    FilamentError,
    InfeasibleError,
    PreconditionError,
    SingularityError,
)
from .evolution import (
    COLLISION_GUARD,
    W_FLOOR,
    FilamentState,
    ScalarWave,
    evolve_filaments,
    evolve_pde,
    reconstruct,
    s_grid,
)
from .field import Grid2D, SymmetricField, embed, ensure_dir, read_coeffs_csv, restrict, write_coeffs_csv
from .spectrum import (
    DEFAULT_EPSILON,
    DEFAULT_SCAN,
    ZERO_TOL,
    OperatorParams,
    bifurcation_frequency,
    certify_gap,
    resonant_set,
)

OUTDIR_ENV = "FILAMENT_WAVES_OUTDIR"
EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 1, 2, 3
EVOLVE_HEADER = ["filament", "t", "s", "re", "im"]
INVARIANT_HEADER = ["t", "mass", "energy"]

log = logging.getLogger("filament_waves")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad arguments; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# helpers


def output_path(path) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    ensure_dir(p.parent)
    return p


def _pair(text: str, kind=int) -> tuple:
    try:
        vals = tuple(kind(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from exc
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return vals


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _emit_json(doc: dict, out: Path | None) -> None:
    text = json.dumps(doc, indent=2)
    print(text)
    if out is not None:
        out.write_text(text + "\n")


class _Stream:
    """Writes text lines to stdout and, optionally, a file."""

    def __init__(self, out: Path | None):
        self.fh = open(out, "w", newline="") if out is not None else None

    def write(self, line: str) -> None:
        sys.stdout.write(line)
        if self.fh:
            self.fh.write(line)

    def close(self) -> None:
        if self.fh:
            self.fh.close()


def _settings_line(settings: dict) -> str:
    return "# settings " + json.dumps(settings, sort_keys=True) + "\n"


def _curve_rows(curves: np.ndarray, t: float) -> list:
    s = s_grid(curves.shape[1])
    return [[f, repr(float(t)), repr(float(s[m])), repr(float(curves[f, m].real)), repr(float(curves[f, m].imag))]
            for f in range(curves.shape[0]) for m in range(curves.shape[1])]


def _write_csv(stream: _Stream, settings: dict, header: list, rows: list, footer=()) -> None:
    stream.write(_settings_line(settings))
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    for line in footer:
        stream.write(f"# {line}\n")


# --------------------------------------------------------------------------
# commands


def cmd_cc(args) -> int:
    settings = {"n": args.n, "kappa": args.kappa, "tol": args.tol, "max_iter": args.max_iter,
                "nested": args.nested, "offsets": args.offsets}
    if args.nested is None:
        if args.offsets is not None:
            raise UsageError("--offsets requires --nested")
        cfg = polygon_config(args.n, args.kappa)
        method = "polygon"
    else:
        rings = args.nested
        offsets = args.offsets if args.offsets is not None else (0.0,) * len(rings)
        if len(offsets) != len(rings):
            raise UsageError("--offsets needs one value per ring")
        if args.n % len(rings):
            raise UsageError(f"n={args.n} is not divisible by the number of rings {len(rings)}")
        seed = nested_polygon_seed(args.n // len(rings), rings, offsets)
        cfg = solve_cc(seed, args.kappa, tol=args.tol, max_iter=args.max_iter)
        method = "newton"
    res = cc_residual(cfg)
    if res > args.tol:
        raise DivergenceError(f"configuration residual {res:.3e} exceeds tol {args.tol:g}", [res])
    doc = cfg.to_json()
    doc.update(residual=res, method=method, settings=settings)
    _emit_json(doc, output_path(args.out))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    J, K = args.scan
    settings = {"q": args.q, "k0": args.k0, "omega": args.omega, "scan": [J, K],
                "epsilon": args.epsilon, "zero_tol": ZERO_TOL}
    doc = {"q": args.q}
    if args.k0 is not None:
        bif = bifurcation_frequency(args.q, args.k0)
        omega = bif.omega0
        doc.update(omega0=omega, j0=bif.j0)
    else:
        omega = args.omega
    p = OperatorParams(args.q, omega, args.epsilon)
    res = resonant_set(p, J, K)
    inside = True
    try:
        p.check_gap_hypothesis()
    except PreconditionError:
        inside = False
    cert = certify_gap(p, res, J, K, check_hypothesis=False)
    doc.update(omega=omega, resonant=[list(r) for r in res], gap=cert.gap, scan=[J, K],
               scan_gap=cert.scan_gap, tail_bound=cert.tail_bound, worst_mode=list(cert.worst_mode),
               gap_hypothesis=inside, settings=settings)
    _emit_json(doc, output_path(args.out))
    return EXIT_OK


def cmd_branch(args) -> int:
    J, K = args.trunc
    st = ContinuationSettings(db=args.db, b_max=args.bmax, tol=args.tol, max_iter=args.max_iter,
                              db_min=args.db_min, J=J, K=K, padding=args.padding)
    bif = bifurcation_frequency(args.q, args.k0)
    settings = {"q": args.q, "k0": args.k0, "j0": bif.j0, "omega0": bif.omega0, "db": st.db,
                "b_max": st.b_max, "tol": st.tol, "max_iter": st.max_iter, "db_min": st.db_min,
                "J": J, "K": K, "padding": st.padding}
    out = output_path(args.out)
    dump = output_path(Path(args.dump_fields) / "x").parent if args.dump_fields else None
    stream = _Stream(out)
    stream.write(_settings_line(settings))
    status = EXIT_OK
    try:
        try:
            branch = continue_branch(bif, st)
            points = branch.points
        except ContinuationError as exc:
            points = exc.points
            print(f"error: {exc}; last good point b={exc.last_point.b:g}", file=sys.stderr)
            status = EXIT_NUMERICAL
            branch = None
        for i, p in enumerate(points):
            rec = {"b": p.b, "omega": p.omega, "residual": p.residual_norm, "iters": p.newton_iters,
                   "full_residual": full_space_residual(p, bif, st.padding)}
            if dump is not None:
                name = f"point_{i:04d}.csv"
                write_coeffs_csv(embed(p.v), dump / name,
                                 comments=[f"b={p.b!r} omega={p.omega!r} q={args.q} k0={args.k0}",
                                           _settings_line(settings)[2:].strip()])
                rec["field"] = str((dump / name).resolve())
            stream.write(json.dumps(rec) + "\n")
        if branch is not None and sum(p.b > 0 for p in points) >= 5:
            rep = verify_asymptotics(branch)
            stream.write(json.dumps({"report": rep.to_json()}) + "\n")
    finally:
        stream.close()
    return status


def _load_branch_point(path: Path, index: int):
    settings, records = None, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("# settings "):
                settings = json.loads(line[len("# settings "):])
            elif line.strip() and not line.startswith("#"):
                rec = json.loads(line)
                if "b" in rec:
                    records.append(rec)
    if settings is None:
        raise UsageError(f"{path}: missing settings header")
    if not 0 <= index < len(records):
        raise UsageError(f"--point {index} out of range (branch has {len(records)} points)")
    rec = records[index]
    grid = Grid2D.for_truncation(settings["J"], settings["K"])
    if "field" in rec:
        fpath = Path(rec["field"])
        if not fpath.is_absolute():
            fpath = path.parent / fpath
        v = restrict(read_coeffs_csv(fpath, grid))
    elif rec["b"] == 0:
        v = SymmetricField.zeros(grid)
    else:
        raise UsageError(f"{path}: point {index} has no stored field; rerun branch with --dump-fields")
    return settings, BranchPoint(rec["b"], rec["omega"], v, rec["residual"], rec["iters"])


def cmd_reconstruct(args) -> int:
    settings, bp = _load_branch_point(Path(args.branch), args.point)
    cfg = CentralConfig.load(args.config)
    curves = reconstruct(bp, cfg, args.t, args.samples, settings["q"])
    run = {"branch": str(args.branch), "point": args.point, "config": str(args.config), "t": args.t,
           "samples": args.samples, "q": settings["q"], "k0": settings["k0"], "b": bp.b, "omega": bp.omega}
    stream = _Stream(output_path(args.out))
    try:
        _write_csv(stream, run, EVOLVE_HEADER, _curve_rows(curves, args.t))
    finally:
        stream.close()
    return EXIT_OK


def _read_curves(path) -> dict:
    """Read ``filament,t,s,re,im`` rows into ``{filament: complex array}``."""
    data: dict = {}
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        if header != EVOLVE_HEADER:
            raise UsageError(f"{path}: expected header {','.join(EVOLVE_HEADER)}")
        for r in reader:
            if r:
                data.setdefault(int(r[0]), []).append(complex(float(r[3]), float(r[4])))
    return {f: np.array(v) for f, v in data.items()}


def _parse_init(args):
    """Returns ``(w or None, config or None, curves or None)`` from ``--init``."""
    spec = args.init
    s = s_grid(args.samples)
    if spec.startswith("constant:"):
        try:
            a = complex(spec.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad constant in --init {spec!r}") from exc
        return np.full(args.samples, a, dtype=complex), None, None
    if spec.startswith("homographic:"):
        parts = spec.split(":", 1)[1].split(",")
        try:
            if parts[0] != "poly" or len(parts) not in (3, 4):
                raise ValueError
            n, kappa = int(parts[1]), float(parts[2])
            eps = float(parts[3]) if len(parts) == 4 else 0.0
        except ValueError as exc:
            raise UsageError("--init homographic:poly,N,KAPPA[,EPS] expected") from exc
        return 1.0 + eps * np.cos(s), polygon_config(n, kappa), None
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"--init: no such file {spec!r}")
    curves = _read_curves(path)
    rows = np.array([curves[f] for f in sorted(curves)])
    return None, None, rows


def cmd_evolve(args) -> int:
    w, cfg, curves = _parse_init(args)
    settings = {"mode": "pde" if args.pde else "filaments", "init": args.init, "dt": args.dt,
                "T": args.T, "samples": args.samples, "record_every": args.record_every,
                "w_floor": W_FLOOR, "collision_guard": COLLISION_GUARD}
    rec = args.record_every
    footer = []
    if args.pde:
        if w is None:
            w = curves[0]
        final, rows = evolve_pde(ScalarWave(w), args.dt, args.T, record_every=rec)
        out_curves = final.values[None, :]
        t_final = final.time
    else:
        if cfg is None and args.config is None:
            raise UsageError("--filaments needs --config or --init homographic:...")
        cfg = cfg or CentralConfig.load(args.config)
        state = FilamentState.homographic(cfg, w) if curves is None else FilamentState(cfg, curves)
        final, rows = evolve_filaments(state, args.dt, args.T, record_every=rec)
        out_curves = np.array(final.curves)
        t_final = final.time
        if curves is None:
            scalar = evolve_pde(ScalarWave(w), args.dt, args.T)
            closure = float(np.max(np.abs(final.curves - np.outer(cfg.all_points, scalar.values))))
            footer.append(f"homographic closure {closure:.3e}")
            print(f"homographic closure {closure:.3e}", file=sys.stderr)
    stream = _Stream(output_path(args.out))
    try:
        _write_csv(stream, settings, EVOLVE_HEADER, _curve_rows(out_curves, t_final), footer)
    finally:
        stream.close()
    if args.invariants:
        with open(output_path(args.invariants), "w", newline="") as fh:
            fh.write(_settings_line(settings))
            w_ = csv.writer(fh, lineterminator="\n")
            w_.writerow(INVARIANT_HEADER)
            w_.writerows([[repr(float(t)), repr(m), repr(e)] for t, m, e in rows])
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="filament-waves", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("cc", help="central configuration (polygon or nested rings)")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--kappa", type=float, required=True)
    c.add_argument("--nested", type=_floats, help="ring radii r1,r2,...")
    c.add_argument("--offsets", type=_floats, help="ring angle offsets o1,o2,...")
    c.add_argument("--tol", type=float, default=CC_TOL)
    c.add_argument("--max-iter", type=int, default=MAX_ITER)
    c.add_argument("--out")
    c.set_defaults(func=cmd_cc)

    s = sub.add_parser("spectrum", help="bifurcation data, resonant set and spectral gap")
    s.add_argument("--q", type=int, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--k0", type=int)
    g.add_argument("--omega", type=float)
    s.add_argument("--scan", type=_pair, default=DEFAULT_SCAN, help="J,K half-widths of the scan box")
    s.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    d = ContinuationSettings()
    b = sub.add_parser("branch", help="continue the standing-wave branch")
    b.add_argument("--q", type=int, required=True)
    b.add_argument("--k0", type=int, required=True)
    b.add_argument("--db", type=float, default=d.db)
    b.add_argument("--bmax", type=float, default=d.b_max)
    b.add_argument("--trunc", type=_pair, default=(d.J, d.K), help="J,K")
    b.add_argument("--tol", type=float, default=d.tol)
    b.add_argument("--max-iter", type=int, default=d.max_iter)
    b.add_argument("--db-min", type=float, default=d.db_min)
    b.add_argument("--padding", type=int, default=d.padding)
    b.add_argument("--dump-fields", metavar="DIR")
    b.add_argument("--out")
    b.set_defaults(func=cmd_branch)

    e = sub.add_parser("evolve", help="time-integrate the scalar equation or the filament system")
    m = e.add_mutually_exclusive_group(required=True)
    m.add_argument("--pde", action="store_true")
    m.add_argument("--filaments", action="store_true")
    e.add_argument("--init", required=True,
                   help="constant:A | homographic:poly,N,KAPPA[,EPS] | FILE (filament,t,s,re,im)")
    e.add_argument("--config", help="CentralConfig JSON for --filaments with FILE init")
    e.add_argument("--dt", type=float, required=True)
    e.add_argument("--T", type=float, required=True)
    e.add_argument("--samples", type=int, default=64)
    e.add_argument("--record-every", type=int, default=1000)
    e.add_argument("--invariants", help="write t,mass,energy CSV here")
    e.add_argument("--out")
    e.set_defaults(func=cmd_evolve)

    r = sub.add_parser("reconstruct", help="filament curves of a stored branch point")
    r.add_argument("--branch", required=True, help="JSON-lines output of 'branch'")
    r.add_argument("--point", type=int, required=True)
    r.add_argument("--config", required=True)
    r.add_argument("--t", type=float, default=0.0)
    r.add_argument("--samples", type=int, default=64)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reconstruct)
    return p


def _validate(args) -> None:
    for name in ("dt", "db", "T"):
        if getattr(args, name, 1.0) is not None and getattr(args, name, 1.0) <= 0:
            raise UsageError(f"--{name} must be positive")
    if getattr(args, "bmax", 0.0) < 0:
        raise UsageError("--bmax must be >= 0")
    if getattr(args, "samples", 4) < 4 or getattr(args, "samples", 4) % 2:
        raise UsageError("--samples must be even and >= 4")
    scan = getattr(args, "scan", None)
    if scan is not None and min(scan) < 0:
        raise UsageError("--scan values must be >= 0")
    trunc = getattr(args, "trunc", None)
    if trunc is not None and min(trunc) < 1:
        raise UsageError("--trunc values must be >= 1")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, DegenerateError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DivergenceError, ContinuationError, DomainError, CollisionError, SingularityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PreconditionError, FilamentError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
