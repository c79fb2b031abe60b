"""Reading and writing solver output.

A solve directory holds comma-separated tables with a one-line header
(numbers written with %.17g, so they read back bit-identically), the
resolved configuration and a ``manifest.json`` listing every file with
its SHA-256 checksum.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .background import LAYERS
from .errors import ConfigError, SolutionInvalidError
from .gasdyn import PrimitiveState, eigenvalues
from .lagrangian import PhysicalField
from .problem import Problem, load_and_validate
from .solver import SolutionField, layer_data, make_grid

FIELD_COLUMNS = ("y1", "y2", "x1", "x2", "rho", "u1", "u2", "P", "Z1", "Z2", "B", "A")
CD_COLUMNS = ("y1", "g_cd", "g_cd_prime", "P", "W")
HISTORY_COLUMNS = ("iteration", "update_norm", "deviation_norm")
PACKAGE_CONFIGS = Path(__file__).parent / "configs"


def resolve_config_path(path) -> Path:
    """A file path, or the name of a bundled configuration (e.g. 'demo')."""
    p = Path(path)
    if p.is_file():
        return p
    bundled = PACKAGE_CONFIGS / f"{p.stem}.yaml"
    if p.suffix in ("", ".yaml") and p.parent == Path(".") and bundled.is_file():
        return bundled
    raise FileNotFoundError(f"config file not found: {path}")


def read_config(path) -> dict:
    p = resolve_config_path(path)
    try:
        conf = yaml.safe_load(p.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"{p}: invalid YAML: {e}") from None
    if not isinstance(conf, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    return conf


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_table(path, columns, data):
    np.savetxt(path, np.column_stack(data), delimiter=",", header=",".join(columns), comments="", fmt="%.17g")


def read_table(path, columns):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"missing table: {path}")
    with open(path) as f:
        header = f.readline().strip().split(",")
    if tuple(header) != tuple(columns):
        raise SolutionInvalidError(f"{path.name}: unexpected header {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {c: data[:, k] for k, c in enumerate(columns)}


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


# ---------------------------------------------------------------------------
# solution directories

def write_solution(out_dir, problem: Problem, sol: SolutionField, phys: PhysicalField, timings=None) -> dict:
    """Write field, interface and history tables plus the manifest; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = sol.grid
    files = []
    for layer in LAYERS:
        s = sol.state[layer]
        Y1, Y2 = np.meshgrid(grid.y1, grid.y2[layer], indexing="ij")
        Z = sol.Z(layer)
        shape = Y1.shape
        cols = [Y1, Y2, Y1, phys.x2[layer], s.rho, s.u1, s.u2, s.P, Z[..., 0], Z[..., 1],
                np.broadcast_to(sol.B[layer], shape), np.broadcast_to(sol.A[layer], shape)]
        name = f"field_{layer}.csv"
        write_table(out / name, FIELD_COLUMNS, [np.ravel(c) for c in cols])
        files.append(name)
    cd = sol.cd_trace()
    write_table(out / "cd_trace.csv", CD_COLUMNS,
                [grid.y1, phys.g_cd, phys.g_cd_prime, 0.5 * (cd["P_minus"] + cd["P_plus"]),
                 0.5 * (cd["W_minus"] + cd["W_plus"])])
    files.append("cd_trace.csv")
    hist = sol.history
    write_table(out / "history.csv", HISTORY_COLUMNS,
                [[h[c] for h in hist] for c in HISTORY_COLUMNS])
    files.append("history.csv")
    (out / "config.yaml").write_text(yaml.safe_dump(problem.config, sort_keys=True))
    files.append("config.yaml")
    manifest = {
        "code_version": __version__,
        "config": problem.config,
        "grid": {"L": grid.L, "N1": grid.N1, "N2": grid.N2},
        "mode": sol.mode,
        "solver": {"iterations": sol.iterations, "converged": sol.converged,
                   "deviation_norm": sol.deviation_norm, "clamped_feet": sol.clamped},
        "sigma": problem.sigma,
        "inlet": {"mass_correction": dict(problem.inlet.mass_correction)},
        "seed": None,
        "timings": timings or {},
        "files": {f: {"sha256": sha256(out / f), "bytes": (out / f).stat().st_size} for f in files},
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def add_to_manifest(out_dir, names, **extra):
    out = Path(out_dir)
    mpath = out / "manifest.json"
    manifest = json.loads(mpath.read_text()) if mpath.is_file() else {"code_version": __version__, "files": {}}
    for f in names:
        manifest["files"][f] = {"sha256": sha256(out / f), "bytes": (out / f).stat().st_size}
    manifest.update(extra)
    write_json(mpath, manifest)
    return manifest


def check_manifest(out_dir) -> list:
    """Names of listed files that are missing or whose checksum differs."""
    out = Path(out_dir)
    manifest = json.loads((out / "manifest.json").read_text())
    bad = []
    for name, meta in manifest["files"].items():
        p = out / name
        if not p.is_file() or sha256(p) != meta["sha256"]:
            bad.append(name)
    return bad


def read_solution(out_dir):
    """Rebuild (problem, SolutionField) from a solve directory."""
    out = Path(out_dir)
    mpath = out / "manifest.json"
    if not mpath.is_file():
        raise FileNotFoundError(f"missing manifest: {mpath}")
    manifest = json.loads(mpath.read_text())
    gm = manifest["grid"]
    problem = load_and_validate(copy.deepcopy(manifest["config"])).with_solver(N2=gm["N2"], N1=gm["N1"])
    grid = make_grid(problem)
    ld = layer_data(problem, grid)
    shape = (grid.N1 + 1, grid.N2 + 1)
    state, lam, Zhat, Zb, B, A = {}, {}, {}, {}, {}, {}
    for layer in LAYERS:
        t = read_table(out / f"field_{layer}.csv", FIELD_COLUMNS)
        if t["y1"].size != shape[0] * shape[1]:
            raise SolutionInvalidError(f"field_{layer}.csv: expected {shape[0] * shape[1]} rows, "
                                       f"found {t['y1'].size}")
        a = {c: v.reshape(shape) for c, v in t.items()}
        grid.y2[layer] = a["y2"][0].copy()
        s = PrimitiveState(a["rho"], a["u1"], a["u2"], a["P"])
        state[layer] = s
        try:
            lam[layer] = eigenvalues(s, problem.gas)
        except ArithmeticError:
            lam[layer] = None
        Z = np.stack([a["Z1"], a["Z2"]], axis=-1)
        Zb[layer] = np.broadcast_to(ld[layer].Zb, Z.shape).copy()
        Zhat[layer] = Z - Zb[layer]
        B[layer], A[layer] = a["B"][0].copy(), a["A"][0].copy()
    hist = read_table(out / "history.csv", HISTORY_COLUMNS)
    history = [{"iteration": int(i), "update_norm": float(u), "deviation_norm": float(d)}
               for i, u, d in zip(hist["iteration"], hist["update_norm"], hist["deviation_norm"])]
    sol = SolutionField(grid=grid, mode=manifest.get("mode", "picard_lp"), Zhat=Zhat, Zb=Zb, B=B, A=A,
                        state=state, lam=lam, history=history,
                        iterations=manifest["solver"]["iterations"],
                        converged=manifest["solver"]["converged"],
                        clamped=manifest["solver"]["clamped_feet"])
    return problem, sol, manifest
