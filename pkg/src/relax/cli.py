"""Command-line driver.

    relax run <name|config.json> [--dx v] [--gamma v] [--h v] [--K n]
              [--init zero|plus|minus|file] [--init-file path] [--seed n] [--out dir]
    relax sweep <name|config.json> [--dx-list 2^-5,2^-6,...] [--out dir]
    relax oracle example1|example2 [--out dir]

Output files are written only after the whole computation has succeeded.
On failure a JSON error record is printed to stderr and the exit status is
2 for configuration errors and 1 for numerical failures.
"""
import argparse
import json
import math
import os
import shutil
import sys
import tempfile
import time

import numpy as np

from . import experiments as ex
from .envelope import SampledFunction, build_envelope, sample
from .errors import ConfigError, RelaxError
from .measure import measure_of_solution, oscillation_report
from .oracle import DOUBLE_WELL, ONE_SIDED, oracle
from .solver1d import Dirichlet, Natural, PotentialV, Problem, SolverConfig, default_step, solve
from .solver2d import Config2D, grid_nodes, solve_2d, symmetric_guesses

DEFAULT_SWEEP = ["2^-5", "2^-6", "2^-7", "2^-8", "2^-9", "2^-10"]

KEYS = {"experiment", "gamma", "h", "dx", "K", "gs_sweeps", "tol", "splitting_a", "bc",
        "seed", "max_outer", "init", "d_range", "interval", "W", "V", "n", "scheme"}


# ------------------------------------------------------------------ config

def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _positive(cfg, key):
    v = cfg.get(key)
    if v is not None and not (_is_number(v) and v > 0):
        raise ConfigError(f"{key} must be a positive number", key)


def _count(cfg, key):
    v = cfg.get(key)
    if v is not None and not (isinstance(v, int) and not isinstance(v, bool) and v >= 1):
        raise ConfigError(f"{key} must be an integer >= 1", key)


def _pair(v, key):
    if not (isinstance(v, list) and len(v) == 2 and all(_is_number(t) for t in v)
            and v[0] < v[1]):
        raise ConfigError(f"{key} must be an increasing pair of numbers", key)
    return float(v[0]), float(v[1])


def validate(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(cfg) - KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration key {unknown[0]!r}", unknown[0])
    name = cfg.get("experiment")
    if name not in ex.NAMES + ("custom",):
        raise ConfigError(f"unknown experiment {name!r}", "experiment")
    if "dx" in cfg:
        cfg["dx"] = ex.parse_dx(cfg["dx"])
    for key in ("gamma", "h", "tol"):
        _positive(cfg, key)
    for key in ("K", "gs_sweeps", "max_outer"):
        _count(cfg, key)
    n = cfg.get("n")
    if n is not None and not (isinstance(n, int) and not isinstance(n, bool) and n >= 4):
        raise ConfigError("n must be an integer >= 4", "n")
    a = cfg.get("splitting_a")
    if a is not None and not (_is_number(a) and a >= 0):
        raise ConfigError("splitting_a must be a non-negative number", "splitting_a")
    seed = cfg.get("seed")
    if seed is not None and not (isinstance(seed, int) and not isinstance(seed, bool)
                                 and seed >= 0):
        raise ConfigError("seed must be a non-negative integer", "seed")
    if "d_range" in cfg:
        _pair(cfg["d_range"], "d_range")
    if cfg.get("scheme", "symmetric") not in ("symmetric", "forward"):
        raise ConfigError("scheme must be 'symmetric' or 'forward'", "scheme")
    init = cfg.get("init")
    if init is not None and init not in ("zero", "plus", "minus", "file"):
        raise ConfigError("init must be zero, plus, minus or file", "init")
    if "bc" in cfg:
        parse_bc(cfg["bc"], None)
    return cfg


def parse_bc(spec, default):
    if spec is None:
        return default
    if spec == "natural" or spec == {"type": "natural"}:
        return Natural()
    if spec == "dirichlet":
        return default if isinstance(default, Dirichlet) else Dirichlet(0.0, 0.0)
    if isinstance(spec, dict) and spec.get("type") == "dirichlet":
        left, right = spec.get("left", 0.0), spec.get("right", 0.0)
        if not (_is_number(left) and _is_number(right)) or set(spec) - {"type", "left", "right"}:
            raise ConfigError("dirichlet bc needs numeric left/right", "bc")
        return Dirichlet(float(left), float(right))
    raise ConfigError("bc must be 'natural', 'dirichlet' or a dirichlet object", "bc")


def load_source(source):
    """A named experiment or the path of a JSON configuration file."""
    if source in ex.NAMES:
        return {"experiment": source}
    if not os.path.isfile(source):
        raise ConfigError(f"{source!r} is neither an experiment name nor a file", "source")
    try:
        with open(source, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read configuration: {err}", "source") from None
    return validate(cfg)


def apply_overrides(cfg, args):
    for key in ("dx", "gamma", "h", "K", "seed", "init"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return validate(cfg)


def _custom_setup(cfg):
    for key in ("interval", "W", "V"):
        if key not in cfg:
            raise ConfigError(f"custom experiment needs {key!r}", key)
    interval = _pair(cfg["interval"], "interval")
    wspec = cfg["W"]
    if not isinstance(wspec, dict):
        raise ConfigError("W must be an object", "W")
    try:
        if "nodes" in wspec:
            W = SampledFunction(wspec["nodes"], wspec["values"])
        else:
            func = ex.POTENTIALS_W[wspec["form"]]
            lo, hi = _pair(wspec["range"], "W.range")
            samples = wspec.get("samples", 4096)
            if not (isinstance(samples, int) and samples >= 1):
                raise ConfigError("W.samples must be a positive integer", "W")
            W = sample(func, lo, hi, samples)
    except (KeyError, TypeError):
        raise ConfigError("W needs nodes/values or form/range", "W") from None
    except RelaxError as err:
        raise ConfigError(str(err), "W") from None
    vspec = cfg["V"]
    if not isinstance(vspec, dict) or "form" not in vspec:
        raise ConfigError("V must be an object with a form", "V")
    g = vspec.get("g")
    if isinstance(g, str):
        if g not in ex.G_FUNCTIONS:
            raise ConfigError(f"unknown g {g!r}", "V")
        g = ex.G_FUNCTIONS[g]
    elif g is not None and not _is_number(g):
        raise ConfigError("V.g must be a number or a named function", "V")
    try:
        V = PotentialV(vspec["form"], g, float(cfg.get("splitting_a", 0.0)))
    except RelaxError as err:
        raise ConfigError(str(err), "V") from None
    bc = parse_bc(cfg.get("bc"), Dirichlet(0.0, 0.0))
    return ex.Setup1D("custom", W, Problem(build_envelope(W), V), interval, bc,
                      2.0 ** -7, 5, 10, "zero")


def resolve_1d(cfg):
    """Setup, grid and solver configuration for a 1D run."""
    name = cfg["experiment"]
    if name == "custom":
        st = _custom_setup(cfg)
    else:
        st = ex.setup(name, seed=cfg.get("seed", 0), splitting_a=cfg.get("splitting_a"),
                      d_range=tuple(cfg["d_range"]) if "d_range" in cfg else None)
    dx = cfg.get("dx", st.dx)
    grid = st.grid(dx)
    step = default_step(grid.dx)
    scfg = SolverConfig(
        gamma=float(cfg.get("gamma", step)), h=float(cfg.get("h", step)),
        K=cfg.get("K", st.K), gs_sweeps=cfg.get("gs_sweeps", st.gs_sweeps),
        tol=float(cfg.get("tol", 1e-12)), max_outer=cfg.get("max_outer", 50_000),
        bc=parse_bc(cfg.get("bc"), st.bc))
    return st, grid, scfg


# ------------------------------------------------------------------ output

def _f(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def csv_text(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_f(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def write_outputs(out_dir, files):
    """Write all files into out_dir, or nothing if any write fails."""
    parent = os.path.dirname(os.path.abspath(out_dir)) or "."
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=".relax-", dir=parent)
    try:
        for name, text in files.items():
            with open(os.path.join(tmp, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        os.makedirs(out_dir, exist_ok=True)
        for name in files:
            os.replace(os.path.join(tmp, name), os.path.join(out_dir, name))
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


# ------------------------------------------------------------------ commands

def _initial(st, grid, cfg, args):
    init = cfg.get("init")
    if init == "file":
        path = getattr(args, "init_file", None)
        if not path:
            raise ConfigError("--init file needs --init-file", "init")
        try:
            u0 = np.loadtxt(path, delimiter=",", ndmin=1)
        except (OSError, ValueError) as err:
            raise ConfigError(f"cannot read initial guess: {err}", "init") from None
        return st.initial_guess(grid, u0)
    return st.initial_guess(grid, init)


def _run_1d(cfg, args):
    st, grid, scfg = resolve_1d(cfg)
    u0 = _initial(st, grid, cfg, args)
    rep = solve(st.problem, scfg, grid, u0)
    env = st.problem.envelope
    pm = measure_of_solution(rep, env, st.W)
    osc = oscillation_report(pm)
    x = grid.x
    nan = float("nan")
    cells = [(ux, d, b) for ux, d, b in zip(rep.ux, rep.d, rep.b)] + [(nan, nan, nan)]
    solution = csv_text(["x", "u", "ux", "d", "b"],
                        [(xi, ui) + c for xi, ui, c in zip(x, rep.u, cells)])
    diagnostics = csv_text(["n", "energy", "constraint_error"],
                           [(i + 1, float(e), float(c)) for i, (e, c) in
                            enumerate(zip(rep.energy_history, rep.constraint_history))])
    report = {
        "experiment": st.name,
        "final_energy": rep.final_energy,
        "final_energy_cell": rep.final_energy_cell,
        "oscillation_intervals": osc.to_dict()["intervals"],
        "converged": bool(rep.converged),
        "outer_iterations": rep.outer_iterations,
        "final_constraint_error": float(rep.constraint_history[-1]),
        "seed": st.seed,
        "config": {"dx": grid.dx, "gamma": scfg.gamma, "h": scfg.h, "K": scfg.K,
                   "gs_sweeps": scfg.gs_sweeps, "tol": scfg.tol,
                   "max_outer": scfg.max_outer,
                   "bc": "natural" if isinstance(scfg.bc, Natural) else
                   {"type": "dirichlet", "left": scfg.bc.left, "right": scfg.bc.right}},
    }
    if st.name in ("example1", "example2"):
        res = oracle(st.name)
        report["oracle_energy"] = res.energy
        report["oracle_x_star"] = res.x_star
    files = {
        "solution.csv": solution,
        "diagnostics.csv": diagnostics,
        "measure.json": json_text(pm.to_list()),
        "envelope.json": json_text(env.to_dict()),
        "report.json": json_text(report),
    }
    summary = (f"{st.name}: energy {rep.final_energy:.6f} after {rep.outer_iterations} "
               f"outer iterations, converged={rep.converged}")
    return files, summary


def _run_2d(cfg, args):
    dx = cfg.get("dx")
    n = cfg.get("n")
    if n is None:
        n = 50 if dx is None else int(round(2.0 / dx))
        if dx is not None and abs(2.0 / n - dx) > 1e-12:
            raise ConfigError("dx must divide the interval [-1, 1]", "dx")
    step = 2.0 / n
    c2 = Config2D(n=n, gamma=float(cfg.get("gamma", step)), h=float(cfg.get("h", step)),
                  a=float(cfg.get("splitting_a", 2.5)), tol=float(cfg.get("tol", 1e-10)),
                  max_iter=cfg.get("max_outer", 200_000), scheme=cfg.get("scheme", "symmetric"))
    init = cfg.get("init") or "plus"
    plus, minus = symmetric_guesses(n)
    if init == "file":
        raise ConfigError("file initial guesses are only supported in 1D", "init")
    u0 = {"plus": plus, "minus": minus, "zero": None}[init]
    rep = solve_2d(c2, u0)
    x, X, Y = grid_nodes(n)
    field = csv_text(["x", "y", "u"], zip(X.ravel(), Y.ravel(), rep.u.ravel()))
    grid = {"x": [float(v) for v in x], "y": [float(v) for v in x],
            "u": [[float(v) for v in row] for row in rep.u]}
    diagnostics = csv_text(["n", "constraint_error"],
                           [(i + 1, c) for i, c in enumerate(rep.constraint_history)])
    energy = csv_text(["n", "energy"], [(int(k), e) for k, e in rep.energy_history])
    report = {"experiment": "example6", "final_energy": rep.energy,
              "converged": bool(rep.converged), "iterations": rep.iterations,
              "final_constraint_error": rep.final_constraint, "scheme": rep.scheme,
              "config": {"n": n, "gamma": c2.gamma, "h": c2.h, "a": c2.a, "tol": c2.tol,
                         "max_iter": c2.max_iter, "init": init}}
    files = {"field.csv": field, "grid.json": json_text(grid),
             "diagnostics.csv": diagnostics, "energy.csv": energy,
             "report.json": json_text(report)}
    summary = (f"example6: energy {rep.energy:.6f} after {rep.iterations} sweeps, "
               f"converged={rep.converged}")
    return files, summary


def cmd_run(args):
    cfg = apply_overrides(load_source(args.source), args)
    if cfg["experiment"] == "example6":
        files, summary = _run_2d(cfg, args)
    else:
        files, summary = _run_1d(cfg, args)
    write_outputs(args.out, files)
    return summary


def cmd_sweep(args):
    cfg = load_source(args.source)
    if cfg["experiment"] == "example6":
        raise ConfigError("sweep is only available for 1D experiments", "experiment")
    dxs = [ex.parse_dx(t) for t in args.dx_list.split(",") if t.strip()]
    rows = []
    oracle_energy = None
    if cfg["experiment"] in ("example1", "example2"):
        oracle_energy = oracle(cfg["experiment"]).energy
    for dx in dxs:
        case = dict(cfg, dx=dx)
        validate(case)
        st, grid, scfg = resolve_1d(case)
        rep = solve(st.problem, scfg, grid, _initial(st, grid, case, args))
        rows.append((grid.dx, rep.final_energy, rep.final_energy_cell,
                     oracle_energy if oracle_energy is not None else float("nan"),
                     int(rep.outer_iterations), int(rep.converged)))
    table = csv_text(["dx", "energy", "energy_cell", "oracle_energy", "outer_iterations",
                      "converged"], rows)
    write_outputs(args.out, {"energy_table.csv": table})
    return f"{cfg['experiment']}: {len(rows)} grid spacings"


def cmd_oracle(args):
    res = oracle(args.name)
    sysm = ONE_SIDED if args.name == "example1" else DOUBLE_WELL
    t = res.trajectory
    H = sysm.hamiltonian(t.u, t.v)
    traj = csv_text(["x", "u", "v", "H"], zip(t.x, t.u, t.v, H))
    info = {"experiment": args.name, "x_star": res.x_star, "energy": res.energy,
            "hamiltonian_drift": res.hamiltonian_drift, "level": res.level}
    write_outputs(args.out, {"trajectory.csv": traj, "oracle.json": json_text(info)})
    return f"{args.name}: x* = {res.x_star:.6f}, energy = {res.energy:.6f}"


def build_parser():
    p = argparse.ArgumentParser(prog="relax", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve one experiment")
    r.add_argument("source", help="experiment name (example1..example6) or JSON config path")
    r.add_argument("--dx", type=str)
    r.add_argument("--gamma", type=float)
    r.add_argument("--h", type=float)
    r.add_argument("--K", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--init", choices=["zero", "plus", "minus", "file"])
    r.add_argument("--init-file", dest="init_file")
    r.add_argument("--out", default="out")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="energy against grid spacing")
    s.add_argument("source")
    s.add_argument("--dx-list", default=",".join(DEFAULT_SWEEP),
                   help="comma separated spacings, e.g. 2^-5,2^-6 (empty for none)")
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="shooting solution of example1 or example2")
    o.add_argument("name", choices=["example1", "example2"])
    o.add_argument("--out", default="out")
    o.set_defaults(func=cmd_oracle)
    return p


def error_record(err):
    return {"error": {"type": getattr(err, "kind", type(err).__name__),
                      "message": str(err), "field": getattr(err, "field", None)}}


def main(argv=None):
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        summary = args.func(args)
    except ConfigError as err:
        print(json.dumps(error_record(err)), file=sys.stderr)
        return 2
    except RelaxError as err:
        print(json.dumps(error_record(err)), file=sys.stderr)
        return 1
    print(f"{summary} ({time.perf_counter() - t0:.2f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
