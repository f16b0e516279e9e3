"""Command-line entry point: ``bolab <command> --config FILE --out DIR``.

Exit codes: 0 success, 1 configuration or validation error, 2 numerical
failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, load_config
from .errors import ConfigError, NumericalError
from .field import Grid1D, SampledField
from .io import write_csv, write_json

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

GRID_KEYS = {"box", "n"}
FIELD_KEYS = GRID_KEYS | {"poles", "field_t", "gauss_amp", "gauss_width", "gauss_center"}


def _grid(cfg: Config, box=200.0, n=4096) -> Grid1D:
    return Grid1D.centered(cfg.get_float("box", box), cfg.get_int("n", n))


def _field(cfg: Config, base: Path) -> SampledField:
    """Soliton family from ``poles`` plus an optional gaussian bump."""
    from .solitons import family_field, read_poles

    g = _grid(cfg)
    u = np.zeros(g.n)
    path = cfg.get_path("poles", base=base)
    if path is not None:
        u = u + family_field(read_poles(path), cfg.get_float("field_t", 0.0), g)[0].values
    if "gauss_amp" in cfg:
        a = cfg.get_float("gauss_amp")
        w = cfg.get_float("gauss_width", 1.0)
        if not w > 0:
            raise ConfigError("gauss_width must be positive")
        x0 = cfg.get_float("gauss_center", 0.0)
        u = u + a * np.exp(-(((g.x - x0) / w) ** 2))
    return SampledField(g, u)


def cmd_soliton(cfg: Config, out: Path, base: Path) -> list:
    from .solitons import family_field, read_poles

    cfg.check_keys(GRID_KEYS | {"poles", "t", "tail_tol"})
    fam = read_poles(cfg.get_path("poles", base=base) or _missing("poles"))
    g = _grid(cfg)
    t = cfg.get_float("t", 0.0)
    tail_tol = cfg.get_float("tail_tol", 0.0)
    u, _ = family_field(fam, t, g, tail_tol)
    return [write_csv(out / "profile.csv", ["x", "u"], [g.x, u.values])]


def _missing(key):
    raise ConfigError(f"missing required key {key!r}")


def cmd_exact(cfg: Config, out: Path, base: Path) -> list:
    from .engine import exact_solution, neumann_term, read_spectrum, second_order_bound

    cfg.check_keys(GRID_KEYS | {"spec", "times", "C"})
    spec = read_spectrum(cfg.get_path("spec", base=base) or _missing("spec"))
    g = _grid(cfg)
    times = cfg.get_times("times", [0.0])
    C = cfg.get_float("C", 1.0)
    tt, xx, uu, o1, b2 = [], [], [], [], []
    for t in times:
        u = exact_solution(spec, t, g.x)
        tt.append(np.full(g.n, t))
        xx.append(g.x)
        uu.append(u)
        o1.append(float(np.abs(neumann_term(spec, t, g.x, 1)).max()) if len(spec) else 0.0)
        b2.append(second_order_bound(spec, t=t, C=C) if t > 0 else float("inf"))
    return [
        write_csv(out / "exact.csv", ["t", "x", "u"], [np.concatenate(tt), np.concatenate(xx), np.concatenate(uu)]),
        write_csv(out / "diagnostics.csv", ["t", "order1_max", "order2_bound"], [times, o1, b2]),
    ]


def cmd_spectrum(cfg: Config, out: Path, base: Path) -> list:
    from .lax import discrete_spectrum, trace_identity

    cfg.check_keys(FIELD_KEYS | {"M", "eps"})
    u = _field(cfg, base)
    M = cfg.get_int("M", min(1024, u.grid.n // 2))
    eps = cfg.get_float("eps", 5 * u.grid.dxi)
    res = discrete_spectrum(u, eps, M)
    lhs, rhs, gap = trace_identity(u, eps, M)
    idx = np.arange(1, res.eigenvalues.size + 1)
    return [
        write_csv(out / "spectrum.csv", ["index", "lambda", "is_negative"],
                  [idx, res.eigenvalues, res.eigenvalues < -eps]),
        write_json(out / "trace.json", {"lhs": lhs, "rhs": rhs, "gap": gap,
                                        "negative": res.negative_part, "eps": eps, "M": M}),
    ]


def cmd_scatter(cfg: Config, out: Path, base: Path) -> list:
    from .scattering import distorted_spectrum, radiation_profile

    cfg.check_keys(FIELD_KEYS | {"lam_max", "tol"})
    u = _field(cfg, base)
    tol = cfg.get_float("tol", 1e-10)
    lams = None
    if "lam_max" in cfg:
        kmax = int(cfg.get_float("lam_max") / u.grid.dxi)
        if kmax < 1:
            raise ConfigError("lam_max below the first box frequency")
        lams = u.grid.hardy_xi[: min(kmax, u.grid.n_hardy)]
    ds = distorted_spectrum(u, lams, tol)
    prof = radiation_profile(u, ds)
    return [
        write_csv(out / "zeta.csv", ["lambda", "re_zeta", "im_zeta", "residual"],
                  [ds.lams, ds.zeta.real, ds.zeta.imag, ds.residuals]),
        write_csv(out / "radiation.csv", ["x", "u"], [u.grid.x, prof.values]),
    ]


def cmd_evolve(cfg: Config, out: Path, base: Path) -> list:
    from .evolution import bo_evolve, write_trajectory

    cfg.check_keys(FIELD_KEYS | {"T", "dt", "times", "dealias"})
    u = _field(cfg, base)
    T = cfg.get_float("T")
    times = cfg.get_times("times", [T])
    traj = bo_evolve(u, T, cfg.get_float("dt", 2e-3), cfg.get_float("dealias", 2 / 3), times)
    return write_trajectory(traj, out)


def _fit_payload(curve) -> dict:
    from .lab import fit_decay

    try:
        f = fit_decay(curve)
    except ConfigError as exc:
        return {"slope": None, "intercept": None, "r_squared": None, "note": str(exc)}
    return {"slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared}


def cmd_resolve(cfg: Config, out: Path, base: Path) -> list:
    from . import lab

    mode = cfg.get_str("mode", "interaction")
    times = cfg.get_times("times")
    if times.size == 0 or times[0] <= 0:
        raise ConfigError("times must be positive")
    if mode == "radiation":
        cfg.check_keys(FIELD_KEYS | {"mode", "times", "dt", "M"})
        u = _field(cfg, base)
        res = lab.radiation_experiment(u, times, cfg.get_float("dt", 2e-3),
                                       M=cfg.get_int("M", min(1024, u.grid.n // 2)))
        return [
            write_csv(out / "errors.csv", ["t", "err_l2", "err_linf"], [times, res.l2.errors, res.linf.errors]),
            write_json(out / "fit.json", {"l2": _fit_payload(res.l2), "linf": _fit_payload(res.linf),
                                          "edge_fraction": res.edge_fraction}),
        ]
    if mode != "interaction":
        raise ConfigError(f"unknown mode {mode!r}")
    cfg.check_keys(GRID_KEYS | {"mode", "times", "spec", "c1", "c2", "alpha", "n_total"})
    from .engine import read_spectrum

    path = cfg.get_path("spec", base=base)
    if path is not None:
        spec = read_spectrum(path)
        bound_src = spec.lambdas
    else:
        law = lab.SpectralLaw(cfg.get_float("c1", 1.0), cfg.get_float("c2", 1.0), cfg.get_float("alpha", 2.0))
        spec = law.spectrum(cfg.get_int("n_total", 50))
        bound_src = law
    grid = _grid(cfg) if ("box" in cfg or "n" in cfg) else None
    linf = lab.measure_interaction_error(spec, times, grid, "Linf")
    l2 = lab.measure_interaction_error(spec, times, grid, "L2")
    nstar = np.zeros(times.size, dtype=int)
    bound = np.zeros(times.size)
    if len(spec):
        for i, t in enumerate(times):
            nstar[i], bound[i] = lab.minimax_bound(bound_src, t)
    return [
        write_csv(out / "errors.csv", ["t", "err_l2", "err_linf"], [times, l2.errors, linf.errors]),
        write_csv(out / "bounds.csv", ["t", "n_star", "bound"], [times, nstar, bound]),
        write_json(out / "fit.json", _fit_payload(linf)),
    ]


def cmd_fit(cfg: Config, out: Path, base: Path) -> list:
    from .lab import ErrorCurve

    cfg.check_keys({"input", "column", "time_column"})
    path = cfg.get_path("input", base=base) or _missing("input")
    col, tcol = cfg.get_str("column", "err_linf"), cfg.get_str("time_column", "t")
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    header = lines[0].split(",") if lines else []
    if col not in header or tcol not in header:
        raise ConfigError(f"{path}: needs columns {tcol!r} and {col!r}")
    rows = [ln.split(",") for ln in lines[1:] if ln.strip()]
    try:
        t = np.array([float(r[header.index(tcol)]) for r in rows])
        e = np.array([float(r[header.index(col)]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed row ({exc})") from exc
    return [write_json(out / "fit.json", _fit_payload(ErrorCurve(t, e)))]


COMMANDS = {
    "soliton": cmd_soliton,
    "exact": cmd_exact,
    "spectrum": cmd_spectrum,
    "scatter": cmd_scatter,
    "evolve": cmd_evolve,
    "resolve": cmd_resolve,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bolab", description="Benjamin-Ono soliton resolution lab")
    p.add_argument("--version", action="version", version=f"bolab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--config", required=True, type=Path, help="flat key = value file")
        s.add_argument("--out", type=Path, default=Path("."), help="output directory")
        s.add_argument("--threads", type=int, default=0, help="BLAS threads (0 = library default)")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        cfg = load_config(args.config)
        base = args.config.resolve().parent
        if args.threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(args.threads):
                files = COMMANDS[args.command](cfg, args.out, base)
        else:
            files = COMMANDS[args.command](cfg, args.out, base)
        manifest = {
            "command": args.command,
            "config": cfg.values,
            "version": __version__,
            "duration_s": time.perf_counter() - start,
            "files": [str(Path(f).name) for f in files],
        }
        write_json(args.out / "manifest.json", manifest)
    except ConfigError as exc:
        print(f"bolab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"bolab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"bolab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
