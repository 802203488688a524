"""Experiment runner: single runs, named sweeps and CSV artifacts.

Configuration is a flat key=value file (``#`` starts a comment).  Every
key has a default reproducing the standard piston setup; unknown keys are
rejected.  Sweeps execute named presets over a process pool, caching
reference solutions on disk, and emit one CSV per preset whose first line
carries the schema tag checked by downstream tooling.

Exit codes: 0 success, 2 configuration error, 3 all runs diverged.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from . import diagnostics, equations
from .diagnostics import DEFAULTS, Trajectory, output_times, reference_solution
from .errors import ConfigError, SolverError
from .grid import build_grid
from .simulation import Simulation
from .sponge import METHOD_TAGS, AbcMethod

SCHEMA_VERSION = 1


def csv_columns(kind: str) -> list[str]:
    text = resources.files("spongebc").joinpath("csv_schema.json").read_text()
    return json.loads(text)["kinds"][kind]


@dataclass(frozen=True)
class RunSpec:
    """Fully resolved description of one ABC experiment."""

    equation: str
    n: int
    method: str
    omega_over_l: float = 0.0
    sigma: float | None = None
    b: float = 0.5
    weight_profile: str | None = None
    damping_profile: str | None = None
    slowing_profile: str | None = "default"
    amplitude: float = 0.4
    gamma: float = 1.4
    courant: float = 0.8
    t_final: float = DEFAULTS["t_final"]
    output_dt: float = DEFAULTS["output_dt"]
    x_s_over_l: float = 10.0
    wavelength: float = DEFAULTS["wavelength"]
    right_bc: str = "far-field"
    reconstruction: str = "characteristic"
    fine_n: int | None = None
    preset: str = ""

    def validate(self) -> "RunSpec":
        if self.equation not in ("linear", "nonlinear"):
            raise ConfigError(f"equation must be linear or nonlinear, got {self.equation!r}")
        if self.method not in METHOD_TAGS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.n < 4:
            raise ConfigError("n must be at least 4")
        if self.omega_over_l < 0:
            raise ConfigError("omega_over_l must be nonnegative")
        if self.method not in ("none", "extrapolation") and self.omega_over_l == 0:
            raise ConfigError(f"method {self.method!r} needs a sponge (omega_over_l > 0)")
        if self.fine_n is not None and self.fine_n % self.n:
            raise ConfigError("fine_n must be divisible by n")
        return self

    @property
    def sponge_cells(self) -> int:
        """Sponge width in cells, snapped to the nearest interface (at least 1)."""
        if self.omega_over_l == 0:
            return 0
        return max(1, int(round(self.omega_over_l * self.n)))

    @property
    def actual_omega_over_l(self) -> float:
        return self.sponge_cells / self.n

    def method_overrides(self) -> dict:
        out = {}
        if self.sigma is not None:
            out["sigma"] = self.sigma
        if self.weight_profile is not None:
            out["weight_profile"] = self.weight_profile
        if self.damping_profile is not None:
            out["damping_profile"] = self.damping_profile
        if self.slowing_profile != "default":
            out["slowing_profile"] = self.slowing_profile
        out["b"] = self.b
        return out

    def build(self):
        """(eq, grid, geom, method) ready for a Simulation."""
        eq = equations.make_equations(self.equation, self.gamma)
        grid, geom = build_grid(
            self.x_s_over_l * self.wavelength, self.actual_omega_over_l,
            self.n, self.wavelength,
        )
        if self.method in ("none", "extrapolation"):
            method = AbcMethod(tag=self.method)
        else:
            method = AbcMethod.preset(self.method, geom, **self.method_overrides())
        return eq, grid, geom, method


CONFIG_TYPES = {
    "equation": str, "n": int, "method": str, "omega_over_l": float, "sigma": float,
    "b": float, "weight_profile": str, "damping_profile": str, "slowing_profile": str,
    "amplitude": float, "gamma": float, "courant": float, "t_final": float,
    "output_dt": float, "x_s_over_l": float, "wavelength": float, "right_bc": str,
    "reconstruction": str, "fine_n": int, "preset": str,
}


def parse_config(text: str) -> RunSpec:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in CONFIG_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        caster = CONFIG_TYPES[key]
        try:
            values[key] = caster(val) if caster is not str else val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    if values.get("slowing_profile", "").lower() in ("none", "off"):
        values["slowing_profile"] = None
    for required in ("equation", "n", "method"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")
    if "slowing_profile" not in values:
        values["slowing_profile"] = "default"
    try:
        return RunSpec(**values).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class ErrorReport:
    spec: RunSpec
    status: str
    e_abc: float
    e_num: float | None
    runtime_s: float
    series: list = field(default_factory=list)

    def row(self) -> dict:
        return {
            "preset": self.spec.preset,
            "method": self.spec.method,
            "equation": self.spec.equation,
            "n": self.spec.n,
            "omega_over_l": self.spec.actual_omega_over_l,
            "requested_omega_over_l": self.spec.omega_over_l,
            "sigma": "" if self.spec.sigma is None else self.spec.sigma,
            "status": self.status,
            "e_abc": self.e_abc,
            "e_num": "" if self.e_num is None else self.e_num,
            "runtime_s": self.runtime_s,
        }


def _reference(spec: RunSpec, n: int, cache_dir: str | None) -> Trajectory:
    return reference_solution(
        spec.equation, n,
        wavelength=spec.wavelength, x_s_over_l=spec.x_s_over_l,
        amplitude=spec.amplitude, gamma=spec.gamma, courant=spec.courant,
        t_final=spec.t_final, output_dt=spec.output_dt, cache_dir=cache_dir,
        reconstruction=spec.reconstruction,
    )


def run_single(spec: RunSpec, cache_dir: str | None = None) -> ErrorReport:
    """Reference (cached) plus ABC run; divergence is recorded, not raised."""
    spec.validate()
    ref = _reference(spec, spec.n, cache_dir)
    eq, grid, geom, method = spec.build()
    sim = Simulation(
        eq, grid, geom, method,
        right_bc=spec.right_bc, amplitude=spec.amplitude, courant=spec.courant,
        reconstruction=spec.reconstruction,
    )
    times = output_times(spec.t_final, spec.output_dt)
    result = sim.run(times, raise_on_failure=False)
    if result.status != "ok":
        return ErrorReport(spec=spec, status="diverged", e_abc=math.inf, e_num=None,
                           runtime_s=result.runtime_s)
    test = diagnostics.trajectory_from_result(result, geom.x_start)
    series = diagnostics.error_series(ref, test)
    e_abc = float(np.max(series, initial=0.0))
    e_num = None
    if spec.fine_n is not None:
        fine = _reference(spec, spec.fine_n, cache_dir)
        e_num = diagnostics.error_num(ref, fine)
    return ErrorReport(spec=spec, status="ok", e_abc=e_abc, e_num=e_num,
                       runtime_s=result.runtime_s,
                       series=list(zip(ref.times.tolist(), series.tolist())))


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isinf(v):
        return "inf"
    return f"{v:.12e}"


def write_csv(path: str, kind: str, rows: list[dict]) -> None:
    cols = csv_columns(kind)
    lines = [f"# spongebc-csv schema={SCHEMA_VERSION} kind={kind}", ",".join(cols)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in cols))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# presets

OMEGA_TABLE = (0.125, 0.25, 0.5, 1.0)
OMEGA_CURVE = (0.04, 0.08, 0.125, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0)
SIGMA_CURVE_SDO = (1.0, 3.0, 10.0, 30.0, 100.0)
SIGMA_CURVE_NDO = (1.0, 5.0, 20.0, 80.0)
REFLECTION_SIGMAS = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
REFLECTION_NS = (4, 6, 10, 25, 50)


def _grid_of(ov, key, default):
    value = ov.get(key)
    if value is None:
        return tuple(default)
    return (value,) if np.isscalar(value) else tuple(value)


def preset_table1(ov):
    specs = []
    for equation in _grid_of(ov, "equation", ("linear", "nonlinear")):
        for slowing in ("A", "B"):
            for damping in ("A", "B"):
                for omega in _grid_of(ov, "omega_over_l", OMEGA_TABLE):
                    specs.append(RunSpec(
                        equation=equation, n=int(ov.get("n") or 250), method="sdo",
                        omega_over_l=omega, sigma=float(ov.get("sigma") or 30.0),
                        slowing_profile=slowing, damping_profile=damping,
                        t_final=ov.get("t_final", DEFAULTS["t_final"]),
                        fine_n=ov.get("fine_n"), preset="table1",
                    ))
    return "errors", specs


def preset_table2(ov):
    specs = []
    for damping in ("A", "B"):
        for omega in _grid_of(ov, "omega_over_l", OMEGA_TABLE):
            specs.append(RunSpec(
                equation=str(ov.get("equation") or "nonlinear"), n=int(ov.get("n") or 250),
                method="ndo", omega_over_l=omega, sigma=float(ov.get("sigma") or 20.0),
                damping_profile=damping, t_final=ov.get("t_final", DEFAULTS["t_final"]),
                fine_n=ov.get("fine_n"), preset="table2",
            ))
    return "errors", specs


def preset_table3(ov):
    specs = []
    for equation in _grid_of(ov, "equation", ("linear", "nonlinear")):
        for method in _grid_of(ov, "method", ("rm", "rm-m")):
            for weight in ("A", "B"):
                for omega in _grid_of(ov, "omega_over_l", OMEGA_TABLE):
                    specs.append(RunSpec(
                        equation=equation, n=int(ov.get("n") or 250), method=method,
                        omega_over_l=omega, weight_profile=weight,
                        t_final=ov.get("t_final", DEFAULTS["t_final"]),
                        fine_n=ov.get("fine_n"), preset="table3",
                    ))
    return "errors", specs


def _sigma_curve(ov, method, sigmas, preset):
    specs = []
    for sigma in _grid_of(ov, "sigma", sigmas):
        for omega in _grid_of(ov, "omega_over_l", OMEGA_TABLE):
            specs.append(RunSpec(
                equation=str(ov.get("equation") or "nonlinear"), n=int(ov.get("n") or 250),
                method=method, omega_over_l=omega, sigma=sigma,
                t_final=ov.get("t_final", DEFAULTS["t_final"]),
                fine_n=ov.get("fine_n"), preset=preset,
            ))
    return "errors", specs


def preset_fig_sdo_sigma(ov):
    return _sigma_curve(ov, "sdo", SIGMA_CURVE_SDO, "fig_sdo_sigma")


def preset_fig_ndo_sigma(ov):
    return _sigma_curve(ov, "ndo", SIGMA_CURVE_NDO, "fig_ndo_sigma")


def _comparison(ov, methods, preset):
    specs = []
    for equation in _grid_of(ov, "equation", ("linear", "nonlinear")):
        for n in _grid_of(ov, "n", (10, 50, 250)):
            for method in _grid_of(ov, "method", methods):
                omegas = (0.0,) if method in ("none", "extrapolation") \
                    else _grid_of(ov, "omega_over_l", OMEGA_CURVE)
                for omega in omegas:
                    specs.append(RunSpec(
                        equation=equation, n=int(n), method=method, omega_over_l=omega,
                        sigma=ov.get("sigma"),
                        t_final=ov.get("t_final", DEFAULTS["t_final"]),
                        fine_n=ov.get("fine_n"), preset=preset,
                    ))
    return "errors", specs


def preset_fig_rm_compare(ov):
    return _comparison(ov, ("rm", "rm-m", "rm2", "rm-m2", "rm-rk", "rm-m-rk"),
                       "fig_rm_compare")


def preset_fig_all_compare(ov):
    return _comparison(ov, ("extrapolation", "rm", "rm-m", "s-sdo", "sdo", "ndo"),
                       "fig_all_compare")


def preset_fig_reflection(ov):
    jobs = []
    t_final = float(ov.get("t_final") or 50.0)
    n_wall = int(ov.get("n") or 50)
    for method in _grid_of(ov, "method", ("sdo", "s-sdo")):
        if method not in ("sdo", "s-sdo"):
            continue
        for omega in _grid_of(ov, "omega_over_l", (0.02, 0.1, 1.0)):
            for sigma in _grid_of(ov, "sigma", REFLECTION_SIGMAS):
                jobs.append(dict(method=method, n=n_wall, omega_over_l=omega,
                                 sigma=sigma, t_final=t_final))
    for method in _grid_of(ov, "method", ("rm-m", "rm")):
        if method not in ("rm-m", "rm"):
            continue
        for n in _grid_of(ov, "n", REFLECTION_NS):
            jobs.append(dict(method=method, n=int(n), omega_over_l=1.0, sigma=None,
                             t_final=t_final))
    return "reflection", jobs


def preset_fig_entropy(ov):
    base = dict(
        equation="nonlinear", n=int(ov.get("n") or 250), method="sdo",
        omega_over_l=float(ov.get("omega_over_l") or 2.0),
        t_final=ov.get("t_final", DEFAULTS["t_final"]),
        preset="fig_entropy",
    )
    specs = [
        ("slow-only", RunSpec(sigma=0.0, **base)),
        ("slow-damp", RunSpec(sigma=float(ov.get("sigma") or 30.0), **base)),
    ]
    return "entropy", specs


PRESETS = {
    "table1": preset_table1,
    "table2": preset_table2,
    "table3": preset_table3,
    "fig_sdo_sigma": preset_fig_sdo_sigma,
    "fig_ndo_sigma": preset_fig_ndo_sigma,
    "fig_rm_compare": preset_fig_rm_compare,
    "fig_all_compare": preset_fig_all_compare,
    "fig_reflection": preset_fig_reflection,
    "fig_entropy": preset_fig_entropy,
}


# ---------------------------------------------------------------------------
# sweep execution

def _error_worker(args):
    spec, cache_dir = args
    return run_single(spec, cache_dir).row()


def _reflection_worker(args):
    job, courant = args
    method_tag = job["method"]
    dx = DEFAULTS["wavelength"] / job["n"]
    spec = RunSpec(
        equation="linear", n=job["n"], method=method_tag,
        omega_over_l=job["omega_over_l"],
        sigma=job["sigma"], slowing_profile=None if method_tag in ("sdo", "s-sdo") else "default",
        courant=courant, t_final=job["t_final"],
    ).validate()
    eq, grid, geom, method = spec.build()
    theory = diagnostics.reflection_theory(method_tag, eq, method.config, dx=dx,
                                           courant=courant)
    numerical = diagnostics.reflection_numerical(method, job["n"], courant=courant,
                                                 t_final=job["t_final"])
    return {
        "method": method_tag, "equation": "linear", "n": job["n"],
        "omega_over_l": spec.actual_omega_over_l,
        "sigma": "" if job["sigma"] is None else job["sigma"],
        "dx": dx, "c_r_theory": theory, "c_r_num": numerical,
    }


def entropy_run(label: str, spec: RunSpec):
    eq, grid, geom, method = spec.build()
    sim = Simulation(eq, grid, geom, method, amplitude=spec.amplitude,
                     courant=spec.courant)
    recorder = diagnostics.sponge_entropy_recorder(eq, grid, geom)
    result = sim.run(output_times(spec.t_final, spec.output_dt),
                     recorders={"entropy": recorder})
    return [{"label": label, "t": t, "entropy": s}
            for t, s in zip(result.times, result.extras["entropy"])]


def _entropy_worker(args):
    return entropy_run(*args)


def _pool_map(worker, items, threads: int):
    if threads <= 1:
        return [worker(item) for item in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, items))


def sweep(preset_name: str, out_dir: str, overrides: dict, threads: int = 1,
          cache_dir: str | None = None) -> int:
    if preset_name not in PRESETS:
        raise ConfigError(f"unknown preset {preset_name!r}; choose from {sorted(PRESETS)}")
    kind, items = PRESETS[preset_name](overrides)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{preset_name}.csv")

    if kind == "errors":
        for spec in items:
            spec.validate()
        # compute shared references once, serially, before fanning out
        seen = set()
        for spec in items:
            for n in {spec.n} | ({spec.fine_n} if spec.fine_n else set()):
                key = (spec.equation, n, spec.t_final)
                if key not in seen:
                    seen.add(key)
                    _reference(spec, n, cache_dir)
        rows = _pool_map(_error_worker, [(spec, cache_dir) for spec in items], threads)
        write_csv(path, "errors", rows)
        if all(row["status"] == "diverged" for row in rows):
            return 3
    elif kind == "reflection":
        courant = float(overrides.get("courant") or 0.8)
        rows = _pool_map(_reflection_worker, [(job, courant) for job in items], threads)
        write_csv(path, "reflection", rows)
    else:  # entropy
        results = _pool_map(_entropy_worker, items, threads)
        rows = [row for chunk in results for row in chunk]
        write_csv(path, "entropy", rows)
    print(path)
    return 0


def write_snapshots(spec: RunSpec, out_path: str) -> None:
    eq, grid, geom, method = spec.build()
    sim = Simulation(eq, grid, geom, method, right_bc=spec.right_bc,
                     amplitude=spec.amplitude, courant=spec.courant)
    states = {"state": lambda fg: fg.interior.copy()}
    result = sim.run(output_times(spec.t_final, spec.output_dt), recorders=states)
    x = grid.centers()
    rows = []
    for t, state in zip(result.times, result.extras["state"]):
        p = eq.pressure(state)
        for j in range(grid.num_cells):
            rows.append({"t": t, "x": x[j], "V": state[0, j], "u": state[1, j],
                         "E": state[2, j], "p": p[j]})
    write_csv(out_path, "snapshot", rows)


# ---------------------------------------------------------------------------
# command line

def _add_override_flags(parser):
    parser.add_argument("--n", type=int, action="append")
    parser.add_argument("--omega-over-l", type=float, action="append")
    parser.add_argument("--method", action="append")
    parser.add_argument("--sigma", type=float, action="append")
    parser.add_argument("--profile", choices=("A", "B"))
    parser.add_argument("--equation", choices=("linear", "nonlinear"), action="append")
    parser.add_argument("--t-final", type=float)
    parser.add_argument("--fine-n", type=int)
    parser.add_argument("--cache-dir", default=None)


def _collect_overrides(args) -> dict:
    ov = {}
    for key in ("n", "omega_over_l", "method", "sigma", "equation"):
        value = getattr(args, key)
        if value:
            ov[key] = value if len(value) > 1 else value[0]
    if args.t_final is not None:
        ov["t_final"] = args.t_final
    if args.fine_n is not None:
        ov["fine_n"] = args.fine_n
    if args.profile is not None:
        ov["profile"] = args.profile
    return ov


def cmd_run(args) -> int:
    with open(args.config) as fh:
        text = fh.read()
    spec = parse_config(text)
    ov = _collect_overrides(args)
    scalar = {}
    for key in ("n", "omega_over_l", "method", "sigma", "equation", "t_final", "fine_n"):
        if key in ov:
            value = ov[key]
            scalar[key] = value[0] if isinstance(value, (tuple, list)) else value
    spec = replace(spec, **scalar)
    if "profile" in ov:
        which = "weight_profile" if spec.method.startswith("rm") else "damping_profile"
        spec = replace(spec, **{which: ov["profile"]})
    spec = spec.validate()
    report = run_single(spec, args.cache_dir)
    out_dir = args.out
    write_csv(os.path.join(out_dir, "run.csv"), "errors", [report.row()])
    series_rows = [
        {"method": spec.method, "equation": spec.equation, "n": spec.n,
         "omega_over_l": spec.actual_omega_over_l, "t": t, "error": e}
        for t, e in report.series
    ]
    write_csv(os.path.join(out_dir, "series.csv"), "series", series_rows)
    if args.snapshots:
        write_snapshots(spec, os.path.join(out_dir, "snapshot.csv"))
    print(f"{spec.method} {spec.equation} n={spec.n} omega/L={spec.actual_omega_over_l:g} "
          f"status={report.status} e_abc={report.e_abc:.6e}")
    return 0 if report.status == "ok" else 3


def cmd_sweep(args) -> int:
    ov = _collect_overrides(args)
    if "profile" in ov:
        ov["weight_profile"] = ov["damping_profile"] = ov.pop("profile")
    return sweep(args.preset, args.out, ov, threads=args.threads, cache_dir=args.cache_dir)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="spongebc",
                                     description="Sponge-layer ABC experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single configured run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=".")
    p_run.add_argument("--snapshots", action="store_true")
    _add_override_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute a named experiment preset")
    p_sweep.add_argument("--preset", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--threads", type=int, default=1)
    _add_override_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
