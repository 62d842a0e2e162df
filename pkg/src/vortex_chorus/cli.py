"""Command-line driver.

    vortex-chorus simulate --family euler --n 4 --init thomson --T 10 --out traj.csv
    vortex-chorus reduce   --family bec --n 3 --init thomson --radius 0.3 --equilibrium
    vortex-chorus search   --family bec --n 3 --I 0.3 --starts 64 --seed 7
    vortex-chorus sweep    --family euler --n 3 --I 3 --levels=-0.1,-0.05
    vortex-chorus sphere   --target cpn1 --n 3 --check-equivariance --samples 100
    vortex-chorus analyze  maximality --n 5 --trials 10000

Every option may also come from a JSON file given with ``--config``; flags
on the command line win.  Exit codes: 0 success, 1 domain error, 2
numerical failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import analysis, spheres
from .choreography import LoopSample, fs_diameter, reduce_states, reduced_space
from .errors import DomainError, NumericalError, VortexError
from .export import export_trajectory, jsonable
from .hamiltonians import SystemSpec, as_complex, random_state, regular_polygon
from .integrate import find_relative_equilibrium, flow, phase_rate
from .search import SearchConfig, energy_sweep, run_search

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64

DEFAULTS = {
    "family": "euler", "n": 3, "gamma": None, "mu": 1.0, "lam": 1.0,
    "out": "-", "format": None,
    # simulate / reduce
    "init": "thomson", "state": None, "radius": None, "seed": 0, "T": 10.0, "tol": 1e-10,
    "samples": 101, "equilibrium": False,
    # search / sweep
    "I": None, "energy": None, "starts": 8, "newton_tol": 1e-9, "max_iter": 40,
    "tseg_min": 0.5, "tseg_max": 2.0, "perturbation": 0.05, "require_nontrivial": False,
    "centred": False, "samples_per_segment": 32, "workers": None, "levels": None,
    # sphere
    "target": "cpn1", "zeta": "1", "check_equivariance": False, "area": None,
    "quad_tol": 1e-8, "calibrate": False,
    # analyze
    "task": None, "rho": 1.0, "trials": 10_000, "alpha": None, "beta": None, "c": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _add_system(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with option values")
    p.add_argument("--family", choices=["euler", "bec", "nls"], default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--gamma", type=_floats, default=S, help="comma-separated vorticities")
    p.add_argument("--mu", type=float, default=S)
    p.add_argument("--lambda", dest="lam", type=float, default=S)
    p.add_argument("--out", default=S, help="output path, '-' for stdout")
    p.add_argument("--format", choices=["csv", "json"], default=S)


def _add_init(p):
    S = argparse.SUPPRESS
    p.add_argument("--init", choices=["thomson", "random", "state"], default=S)
    p.add_argument("--state", type=_floats, default=S, help="x1,y1,...,xn,yn for --init state")
    p.add_argument("--radius", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--T", type=float, default=S)
    p.add_argument("--tol", type=float, default=S)
    p.add_argument("--samples", type=int, default=S)


def _add_search(p):
    S = argparse.SUPPRESS
    p.add_argument("--I", type=float, default=S)
    p.add_argument("--energy", type=float, default=S)
    p.add_argument("--starts", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--newton-tol", type=float, default=S)
    p.add_argument("--max-iter", type=int, default=S)
    p.add_argument("--tseg-min", type=float, default=S)
    p.add_argument("--tseg-max", type=float, default=S)
    p.add_argument("--perturbation", type=float, default=S)
    p.add_argument("--require-nontrivial", action="store_true", default=S)
    p.add_argument("--centred", action="store_true", default=S)
    p.add_argument("--samples-per-segment", type=int, default=S)
    p.add_argument("--workers", type=int, default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="vortex-chorus", description="Vortex choreography toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate and export a trajectory")
    _add_system(p)
    _add_init(p)

    p = sub.add_parser("reduce", help="project a trajectory to CP^{n-1} / CP^{n-2}")
    _add_system(p)
    _add_init(p)
    p.add_argument("--equilibrium", action="store_true", default=S,
                   help="first solve for a relative equilibrium from the initial state")

    p = sub.add_parser("search", help="multi-start relative choreography search")
    _add_system(p)
    _add_search(p)

    p = sub.add_parser("sweep", help="search at a list of energy levels")
    _add_system(p)
    _add_search(p)
    p.add_argument("--levels", type=_floats, default=S, help="comma-separated energies")

    p = sub.add_parser("sphere", help="explicit choreographic spheres")
    p.add_argument("--config", default=S)
    p.add_argument("--target", choices=["cpn1", "cpn2"], default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--zeta", default=S, help="Moebius scale, e.g. 1 or 0.5+2j")
    p.add_argument("--check-equivariance", action="store_true", default=S)
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--area", choices=["unit_disc", "full"], default=S)
    p.add_argument("--quad-tol", type=float, default=S)
    p.add_argument("--calibrate", action="store_true", default=S,
                   help="choose |zeta| so the unit disc carries half the area")

    p = sub.add_parser("analyze", help="chord-log, trap coefficient, separation scan, level probe")
    p.add_argument("task", choices=["maximality", "trap", "shub", "probe"])
    _add_system(p)
    p.add_argument("--rho", type=float, default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--I", type=float, default=S)
    p.add_argument("--starts", type=int, default=S)
    p.add_argument("--c", type=float, default=S)
    p.add_argument("--samples", type=int, default=S)
    return parser


def _load_params(ns: argparse.Namespace) -> dict:
    given = vars(ns)
    params = dict(DEFAULTS)
    if "config" in given:
        try:
            with open(given["config"]) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {given['config']}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        file_cfg = {**file_cfg.pop("system", {}), **file_cfg}
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        params.update(file_cfg)
    params.update({k: v for k, v in given.items() if k != "config"})
    return params


def system_from(params: dict) -> SystemSpec:
    gamma = params["gamma"] or ()
    n = int(params["n"])
    fam = params["family"]
    if fam == "bec":
        return SystemSpec.bec(n, mu=float(params["mu"]), lam=float(params["lam"]), gamma=gamma)
    if fam == "nls":
        return SystemSpec.nls(n, gamma=gamma)
    return SystemSpec.euler(n, gamma=gamma)


def initial_state(spec: SystemSpec, params: dict) -> np.ndarray:
    kind = params["init"]
    radius = params["radius"]
    if radius is None:
        radius = 0.5 if spec.family.value == "bec" else 1.0
    if kind == "thomson":
        return regular_polygon(spec.n, radius)
    if kind == "random":
        return random_state(spec.n, np.random.default_rng(params["seed"]), radius, min_sep=0.3 * radius)
    if params["state"] is None:
        raise DomainError("--init state needs --state x1,y1,...")
    return as_complex(np.asarray(params["state"], dtype=float))


def _open_out(params):
    return sys.stdout if params["out"] in (None, "-") else open(params["out"], "w")


def _emit_json(params, obj):
    fh = _open_out(params)
    try:
        json.dump(jsonable(obj), fh, indent=1)
        fh.write("\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def search_config(params: dict) -> SearchConfig:
    if params["I"] is None:
        raise DomainError("--I (moment of inertia level) is required")
    return SearchConfig(
        I_level=float(params["I"]),
        energy_target=None if params["energy"] is None else float(params["energy"]),
        n_starts=int(params["starts"]),
        seed=int(params["seed"]),
        newton_tol=float(params["newton_tol"]),
        max_iter=int(params["max_iter"]),
        T_seg_range=(float(params["tseg_min"]), float(params["tseg_max"])),
        perturbation_scale=float(params["perturbation"]),
        require_nontrivial=bool(params["require_nontrivial"]),
        centred=bool(params["centred"]),
        samples_per_segment=int(params["samples_per_segment"]),
    )


# ------------------------------------------------------------ commands

def cmd_simulate(params) -> int:
    spec = system_from(params)
    z0 = initial_state(spec, params)
    traj = flow(spec, z0, float(params["T"]), tol=float(params["tol"]), samples=int(params["samples"]))
    fmt = params["format"] or ("json" if str(params["out"]).endswith(".json") else "csv")
    fh = _open_out(params)
    try:
        export_trajectory(traj, fh, fmt)
    finally:
        if fh is not sys.stdout:
            fh.close()
    drift = traj.drift()
    print(" ".join(f"drift_{k}={v:.3e}" for k, v in drift.items()), file=sys.stderr)
    return EXIT_OK


def cmd_reduce(params) -> int:
    spec = system_from(params)
    z0 = initial_state(spec, params)
    record = {"family": spec.family.value, "n": spec.n}
    if params["equilibrium"]:
        I0 = float(np.sum(spec.gamma_array * np.abs(z0) ** 2))
        re = find_relative_equilibrium(spec, z0, I0)
        z0 = re.Z
        record["equilibrium"] = {
            "Z": re.Z, "omega": re.omega, "residual": re.residual,
            "phase_rate_omega": phase_rate(spec, re.Z), "iterations": re.iterations,
        }
    traj = flow(spec, z0, float(params["T"]), tol=float(params["tol"]), samples=int(params["samples"]))
    space = reduced_space(spec)
    V = reduce_states(traj.states, space)
    loop = LoopSample(space, float(params["T"]), V, spec.n)
    record.update({"space": space.value, "t": traj.times, "points": V, "fs_diameter": fs_diameter(loop)})
    _emit_json(params, record)
    return EXIT_OK


def cmd_search(params) -> int:
    spec = system_from(params)
    cfg = search_config(params)
    rep = run_search(spec, cfg, params["workers"])
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit_json(params, rep.results)
    print(f"converged={sum(s.status == 'converged' for s in rep.starts)} starts={cfg.n_starts} "
          f"emitted={len(rep.results)}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(params) -> int:
    spec = system_from(params)
    cfg = search_config(params)
    levels = params["levels"] or []
    _emit_json(params, energy_sweep(spec, levels, cfg, params["workers"]))
    return EXIT_OK


def cmd_sphere(params) -> int:
    s = spheres.SphereMap.make(int(params["n"]), params["target"],
                               complex(str(params["zeta"]).replace("i", "j")))
    if params["calibrate"]:
        s = spheres.calibrate_scale(s, quad_tol=float(params["quad_tol"]))
        print(f"moebius_scale={s.moebius_scale.real:.17g}{s.moebius_scale.imag:+.17g}j")
    if params["check_equivariance"]:
        pts = list(spheres.random_points(int(params["samples"]), int(params["seed"])))
        print(f"max_defect={spheres.equivariance_defect(s, pts):.6e}")
        a, b = spheres.fixed_point_defects(s)
        print(f"endpoint_fixed_defect={max(a, b):.6e}")
    if params["area"]:
        print(f"area_{params['area']}={spheres.fs_area(s, params['area'], float(params['quad_tol'])):.15g}")
    return EXIT_OK


def cmd_analyze(params) -> int:
    task = params["task"]
    n = int(params["n"])
    if task == "maximality":
        out = asdict(analysis.ngon_maximality_test(n, float(params["rho"]), int(params["trials"]), int(params["seed"])))
    elif task == "trap":
        if params["alpha"] is None or params["beta"] is None:
            raise DomainError("--alpha and --beta are required")
        out = {"alpha": params["alpha"], "beta": params["beta"], "n": n,
               "coefficient": analysis.polygon_trap_coefficient(params["alpha"], params["beta"], n)}
    elif task == "shub":
        if params["I"] is None:
            raise DomainError("--I is required")
        spec = system_from({**params, "family": "bec"})
        rep = analysis.shub_separation_scan(spec, float(params["I"]), int(params["starts"]), int(params["seed"]))
        out = {k: v for k, v in asdict(rep).items() if k != "equilibria"}
        out["passed"] = rep.passed
    else:
        if params["I"] is None or params["c"] is None:
            raise DomainError("--I and --c are required")
        spec = system_from(params)
        rep = analysis.invariant_component_probe(spec, float(params["c"]), float(params["I"]), int(params["samples"]),
                                                 int(params["seed"]))
        out = asdict(rep)
        out["success_rate"] = rep.success_rate
    _emit_json(params, out)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate, "reduce": cmd_reduce, "search": cmd_search,
    "sweep": cmd_sweep, "sphere": cmd_sphere, "analyze": cmd_analyze,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        params = _load_params(ns)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return COMMANDS[ns.command](params)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except VortexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
