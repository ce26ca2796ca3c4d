"""
Command-line front end.

    conformal-eit dtn SPEC --method {closed,transplant,oracle}
    conformal-eit identify (--g CSV | --synthetic SPEC) [--truth SPEC]
    conformal-eit sweep --what {dtn-error,stability,theodorsen} --eps-list ...
    conformal-eit precomp --map-spec SPEC --n-max N

Every run writes CSV tables, a JSON summary where relevant, and a
manifest.json echoing the full configuration. Outputs go to --out, or to
$CONFORMAL_EIT_OUT/<command> when --out is omitted. Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .conformal import first_order_interior, interface_map, theodorsen_solve
from .dtn import Conductivities, dtn_error_norm, dtn_perturbed_disk
from .errors import ConformalEITError, InvalidArgument, OptimizationFailure, UnsupportedGeometry
from .fourier import CircleMap, FourierSeries
from .geometry import (
    DiskSpec,
    PerturbedDiskSpec,
    ShiftedInclusion,
    load_spec,
    symmetric_difference_area,
)
from .identify import (
    disk_neumann,
    fit_disk,
    loglog_fit,
    recover_disk_exact,
    stability_experiment,
)
from .moebius import MoebiusMap, transplant_dtn
from .precompose import (
    composition_error,
    distortion_table,
    doubling_constant,
    norm_symmetry_check,
    quasisymmetric_bound,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
OUT_ENV = "CONFORMAL_EIT_OUT"

HEADERS = {
    "neumann": ["mode", "re", "im"],
    "dtn-error": ["eps", "error_hminushalf", "xi_w1inf", "rho"],
    "stability": ["eps", "symdiff", "residual", "b_re", "b_im", "R"],
    "theodorsen": ["eps", "first_order_gap"],
    "distortion": ["n", "distortion", "bound", "ratio"],
    "composition": ["eps", "error", "bound"],
}


class ConfigError(Exception):
    pass


# -- parsing helpers ---------------------------------------------------------

_TERM = re.compile(r"([+-]?)\s*(\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*(cos|sin)\s*(\d+)")


def parse_shape(text: str) -> FourierSeries:
    """
    Parse a real trigonometric polynomial such as ``cos3`` or
    ``cos3 + 0.5*sin2``, or load ``{"coeffs": [[re, im], ...]}`` from a
    ``.json`` path.
    """
    text = text.strip()
    if text.endswith(".json"):
        try:
            data = json.loads(Path(text).read_text())
            vals = [complex(*v) if isinstance(v, list) else complex(v) for v in data["coeffs"]]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read shape file {text}: {exc}") from exc
        return FourierSeries(np.array(vals))
    total = None
    pos = 0
    for m in _TERM.finditer(text):
        if text[pos:m.start()].strip():
            break
        sign = -1.0 if m.group(1) == "-" else 1.0
        try:
            coef = sign * (float(m.group(2)) if m.group(2) else 1.0)
        except ValueError as exc:
            raise ConfigError(f"cannot parse shape {text!r}") from exc
        k = int(m.group(4))
        term = coef * (FourierSeries.cos(k) if m.group(3) == "cos" else FourierSeries.sin(k))
        total = term if total is None else total + term
        pos = m.end()
    if total is None or text[pos:].strip():
        raise ConfigError(f"cannot parse shape {text!r}")
    return total


def parse_eps_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --eps-list: {exc}") from exc
    if not vals:
        raise ConfigError("--eps-list is empty")
    if any(v < 0 for v in vals):
        raise ConfigError("--eps-list entries must be non-negative")
    return vals


def parse_map_spec(text: str) -> CircleMap:
    """
    ``identity``, ``rotation:A``, ``moebius:RE[,IM]`` (boundary phase) or
    ``sin:A[:K]`` for θ + A sin Kθ.
    """
    name, _, arg = text.partition(":")
    try:
        if name == "identity":
            return CircleMap.identity()
        if name == "rotation":
            return CircleMap.rotation(float(arg))
        if name == "moebius":
            parts = [float(v) for v in arg.split(",")]
            b = complex(parts[0], parts[1] if len(parts) > 1 else 0.0)
            return MoebiusMap(b).boundary_phase()
        if name == "sin":
            parts = arg.split(":")
            amp = float(parts[0])
            k = int(parts[1]) if len(parts) > 1 else 1
            return CircleMap(amp * FourierSeries.sin(k))
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad --map-spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown map spec {text!r}")


def read_neumann_csv(path) -> FourierSeries:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADERS["neumann"]:
            raise ConfigError(f"{path}: expected header {','.join(HEADERS['neumann'])}")
        data = {int(r[0]): complex(float(r[1]), float(r[2])) for r in reader if r}
    if not data:
        raise ConfigError(f"{path}: no coefficients")
    return FourierSeries.from_modes(data)


def _conductivities(args) -> Conductivities:
    try:
        return Conductivities(args.sigma1, args.sigma2)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc


def _load(path) -> object:
    try:
        return load_spec(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    except InvalidArgument as exc:
        raise ConfigError(f"invalid spec {path}: {exc}") from exc


# -- output ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class Output:
    root: Path
    files: list

    def csv(self, name: str, header_key: str, rows) -> Path:
        path = self.root / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADERS[header_key])
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.files.append(name)
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.root / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.files.append(name)
        return path

    def figure(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name


def _out_dir(args) -> Output:
    if args.out:
        root = Path(args.out)
    else:
        root = Path(os.environ.get(OUT_ENV, "conformal_eit_out")) / args.command
    root.mkdir(parents=True, exist_ok=True)
    return Output(root, [])


def _manifest(out: Output, args) -> None:
    import scipy

    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    payload = {
        "command": args.command,
        "argv": [args.command] + _argv_echo(config),
        "config": config,
        "outputs": sorted(out.files),
        "versions": {
            "conformal_eit": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    (out.root / "manifest.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _argv_echo(config: dict) -> list[str]:
    argv = []
    for key, val in config.items():
        if key == "command":
            continue
        if key == "spec":
            argv.insert(0, str(val))
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif val is not None:
            argv += [flag, str(val)]
    return argv


# -- commands ------------------------------------------------------------------

def _neumann_for(spec, cond: Conductivities, f: FourierSeries, method: str, n_modes: int,
                 tol: float, grid: int) -> FourierSeries:
    if method == "oracle":
        from .oracle import fd_solve

        return fd_solve(spec, cond, f, grid).neumann.truncate(n_modes)
    if method == "closed":
        if not isinstance(spec, DiskSpec):
            raise ConfigError("--method closed needs an unperturbed disk")
        return disk_neumann(spec, cond, f).resize(n_modes)
    if isinstance(spec, DiskSpec):
        if spec.center == 0:
            spec = PerturbedDiskSpec.disk(spec.radius)
        else:
            return disk_neumann(spec, cond, f).resize(n_modes)
    if isinstance(spec, PerturbedDiskSpec):
        return dtn_perturbed_disk(spec, f, cond, tol=tol, degree=n_modes).neumann
    if isinstance(spec, ShiftedInclusion):
        mob = MoebiusMap(spec.moebius_b)
        inner = spec.inner

        def centered(F):
            return dtn_perturbed_disk(inner, F, cond, tol=tol, degree=n_modes).neumann

        return transplant_dtn(mob, centered, f, degree=n_modes).resize(n_modes)
    raise ConfigError(f"unsupported spec type {type(spec).__name__}")


def cmd_dtn(args) -> int:
    spec = _load(args.spec)
    cond = _conductivities(args)
    if args.n_modes < 1:
        raise ConfigError("--n-modes must be positive")
    f = FourierSeries.cos(args.f_mode)
    g = _neumann_for(spec, cond, f, args.method, args.n_modes, args.tol, args.grid)
    g = g.resize(args.n_modes)
    out = _out_dir(args)
    rows = [(int(n), c.real, c.imag) for n, c in zip(g.modes, g.coeffs)]
    out.csv("neumann.csv", "neumann", rows)
    if args.figures:
        from .plotting import neumann_spectrum

        neumann_spectrum(g.modes, g.coeffs, out.figure("neumann.png"))
    _manifest(out, args)
    return EXIT_OK


def cmd_identify(args) -> int:
    cond = _conductivities(args)
    truth = None
    if args.g:
        g = read_neumann_csv(args.g)
    elif args.synthetic:
        truth = _load(args.synthetic)
        g = _neumann_for(truth, cond, FourierSeries.cos(), "transplant", args.n_modes,
                         args.tol, 0)
    else:
        raise ConfigError("one of --g or --synthetic is required")
    if args.truth:
        truth = _load(args.truth)
    init = None
    if args.init:
        try:
            cr, ci, r = (float(v) for v in args.init.split(","))
            init = DiskSpec(complex(cr, ci), r)
        except (ValueError, InvalidArgument) as exc:
            raise ConfigError(f"bad --init: {exc}") from exc
    if args.method == "exact":
        result = recover_disk_exact(g, cond)
    else:
        result = fit_disk(g, cond, init=init)
        if args.restarts:
            result = _multistart(g, cond, result, args.restarts, args.seed)
    payload = {
        "b_re": result.disk.center.real,
        "b_im": result.disk.center.imag,
        "R": result.disk.radius,
        "residual": result.residual,
        "iterations": result.iterations,
        "symdiff_to_truth": None,
    }
    if truth is not None:
        try:
            payload["symdiff_to_truth"] = symmetric_difference_area(result.disk, truth)
        except UnsupportedGeometry:
            payload["symdiff_to_truth"] = None
    out = _out_dir(args)
    out.json("identification.json", payload)
    _manifest(out, args)
    return EXIT_OK


def _multistart(g, cond, best, restarts: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        while True:
            c = complex(*rng.uniform(-0.6, 0.6, 2))
            r = rng.uniform(0.1, 0.8)
            if abs(c) + r < 0.89:
                break
        try:
            cand = fit_disk(g, cond, init=DiskSpec(c, r))
        except OptimizationFailure:
            continue
        if cand.residual < best.residual:
            best = cand
    return best


@dataclass(frozen=True)
class _DtnErrorJob:
    shape: FourierSeries
    radius: float
    cond: Conductivities
    n_modes: int

    def __call__(self, eps: float) -> tuple:
        incl = PerturbedDiskSpec(DiskSpec(0, self.radius), self.shape, eps)
        f = FourierSeries.cos()
        geo = interface_map(incl)
        err = dtn_error_norm(incl, f, self.cond, degree=self.n_modes, geometry=geo)
        return (eps, err, geo.xi.w1inf_distance(), geo.rho)


@dataclass(frozen=True)
class _TheodorsenJob:
    shape: FourierSeries
    radius: float

    def __call__(self, eps: float) -> tuple:
        incl = PerturbedDiskSpec(DiskSpec(0, self.radius), self.shape, eps)
        phi = theodorsen_solve(incl)
        lin = first_order_interior(incl)
        grid = phi.grid()
        return (eps, float(np.max(np.abs(phi(grid) - lin(grid)))))


def cmd_sweep(args) -> int:
    eps = parse_eps_list(args.eps_list)
    shape = parse_shape(args.delta_shape)
    cond = _conductivities(args)
    out = _out_dir(args)
    pool = ProcessPoolExecutor(args.jobs) if args.jobs > 1 else None
    mapper = pool.map if pool else map
    try:
        if args.what == "dtn-error":
            rows = list(mapper(_DtnErrorJob(shape, args.base_radius, cond, args.n_modes), eps))
            key, ylabel = "dtn-error", "error"
            summary = _fit_summary(rows)
        elif args.what == "stability":
            table = stability_experiment(shape, eps, cond, args.base_radius, args.n_modes, mapper)
            rows = table.rows
            key, ylabel = "stability", "symdiff"
            summary = {"slope": table.slope, "intercept": table.intercept,
                       "r_squared": table.r_squared, "envelope": table.envelope}
        else:
            rows = list(mapper(_TheodorsenJob(shape, args.base_radius), eps))
            key, ylabel = "theodorsen", "first_order_gap"
            summary = _fit_summary(rows)
    finally:
        if pool:
            pool.shutdown()
    out.csv(f"{key}.csv", key, rows)
    summary["what"] = args.what
    summary["points"] = len(rows)
    out.json("summary.json", summary)
    if args.figures:
        from .plotting import loglog_sweep

        pos = [(r[0], r[1]) for r in rows if r[0] > 0 and r[1] > 0]
        if pos:
            x, y = zip(*pos)
            loglog_sweep(x, y, summary["slope"], summary["intercept"], "eps", ylabel,
                         out.figure(f"{key}.png"))
    _manifest(out, args)
    return EXIT_OK


def _fit_summary(rows) -> dict:
    pos = [(r[0], r[1]) for r in rows if r[0] > 0 and r[1] > 0]
    if len(pos) >= 2:
        slope, intercept, r2 = loglog_fit(*zip(*pos))
    else:
        slope = intercept = r2 = float("nan")
    return {"slope": slope, "intercept": intercept, "r_squared": r2}


def cmd_precomp(args) -> int:
    xi = parse_map_spec(args.map_spec)
    if args.n_max < 1:
        raise ConfigError("--n-max must be positive")
    if not 0 < args.delta < 0.5:
        raise ConfigError("--delta must lie in (0, 1/2)")
    out = _out_dir(args)
    rows = distortion_table(xi, args.n_max, args.delta)
    out.csv("distortion.csv", "distortion", rows)
    u = FourierSeries.cos()
    comp_rows = []
    for e in parse_eps_list(args.eps_list):
        scaled = CircleMap(e * xi.displacement)
        # the distortion exponent δ ∈ (0, 1/2) pairs with composition exponent 2δ
        err, bound = composition_error(u, scaled, 2 * args.delta)
        comp_rows.append((e, err, bound))
    out.csv("composition.csv", "composition", comp_rows)
    norm_fwd, norm_inv = norm_symmetry_check(xi, args.norm_degree)
    k = doubling_constant(xi)
    out.json("norms.json", {
        "operator_norm": norm_fwd,
        "operator_norm_inverse": norm_inv,
        "relative_gap": abs(norm_fwd - norm_inv) / max(norm_fwd, norm_inv),
        "doubling_constant": k,
        "quasisymmetric_bound": quasisymmetric_bound(k),
        "xi_w1inf": xi.w1inf_distance(),
        "norm_degree": args.norm_degree,
    })
    if args.figures:
        from .plotting import distortion_ratio

        distortion_ratio([r[0] for r in rows], [r[3] for r in rows], out.figure("distortion.png"))
    _manifest(out, args)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conformal-eit", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--sigma1", type=float, default=1.0, help="background conductivity")
        sp.add_argument("--sigma2", type=float, default=2.0, help="inclusion conductivity")
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV}/<command>)")
        sp.add_argument("--figures", action="store_true", help="also render PNG figures")

    d = sub.add_parser("dtn", help="Neumann data of one inclusion")
    d.add_argument("spec", help="domain spec JSON")
    common(d)
    d.add_argument("--n-modes", type=int, default=128)
    d.add_argument("--tol", type=float, default=1e-12)
    d.add_argument("--method", choices=("closed", "transplant", "oracle"), default="transplant")
    d.add_argument("--grid", type=int, default=512, help="oracle grid size")
    d.add_argument("--f-mode", type=int, default=1, help="Dirichlet data cos(kθ)")
    d.set_defaults(func=cmd_dtn)

    i = sub.add_parser("identify", help="recover a disk from (cos θ, g)")
    i.add_argument("--g", help="CSV of Neumann coefficients (mode,re,im)")
    i.add_argument("--synthetic", help="spec JSON to synthesize g from")
    i.add_argument("--truth", help="spec JSON of the true inclusion")
    common(i)
    i.add_argument("--method", choices=("fit", "exact"), default="fit")
    i.add_argument("--init", help="initial disk as c_re,c_im,R")
    i.add_argument("--restarts", type=int, default=0, help="extra random restarts")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--n-modes", type=int, default=128)
    i.add_argument("--tol", type=float, default=1e-12)
    i.set_defaults(func=cmd_identify)

    s = sub.add_parser("sweep", help="ε-sweeps with log-log fits")
    s.add_argument("--what", choices=("dtn-error", "stability", "theodorsen"), required=True)
    s.add_argument("--delta-shape", default="cos3")
    s.add_argument("--eps-list", required=True)
    s.add_argument("--base-radius", type=float, default=0.4)
    s.add_argument("--n-modes", type=int, default=128)
    s.add_argument("--jobs", type=int, default=1)
    common(s)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("precomp", help="superposition-operator benches")
    c.add_argument("--map-spec", default="sin:0.05")
    c.add_argument("--n-max", type=int, default=128)
    c.add_argument("--delta", type=float, default=0.25)
    c.add_argument("--eps-list", default="0.125,0.25,0.5,1")
    c.add_argument("--norm-degree", type=int, default=128)
    common(c)
    c.set_defaults(func=cmd_precomp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnsupportedGeometry, InvalidArgument) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OptimizationFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        for step in exc.trace:
            print(json.dumps(step, sort_keys=True), file=sys.stderr)
        return EXIT_NUMERIC
    except ConformalEITError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
