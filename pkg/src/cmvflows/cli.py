"""Command-line front end.

    cmvflows <command> --config <path> [--output <path>] [--seed N]

The config is a JSON object whose keys are the fields of
:class:`ExperimentConfig`.  Exit status is 0 on success, 2 for an invalid
config and 3 when a numerical stage fails.  Floats are written with 17
significant digits so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks
from .cmv import VerblunskyVector, build_factors, coxeter_element, recognize_floquet
from .conserved import invariants
from .curve import BranchProximityError, DirichletProximityError, NonGenericError, dirichlet_data
from .flows import (KINDS, BoundaryApproachError, FactorizationError, HamiltonianSpec, dressing_action,
                    flow_by_factorization, integrate_ode, p_flow_exact)
from .poisson import complex_coordinate_bracket, involution_check, sklyanin_coordinate_brackets
from .rng import SplitMix64

COMMANDS = ("simulate", "invariants", "curve", "orbit-check", "bracket-check", "factor-flow", "verify")
TRIALS = 20


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    def __init__(self, stage, msg):
        super().__init__(f"[{stage}] {msg}")
        self.stage = stage


@dataclass
class ExperimentConfig:
    p: int = 4
    alpha: list | None = None  # [[re, im], ...]; drawn from the seed when absent
    command: str = "invariants"
    hamiltonian: dict = field(default_factory=lambda: {"kind": "ReK", "n": 1})
    t_end: float = 1.0
    dt: float = 1e-3
    h_samples: int = 64
    truncation: int = 64
    tolerance: float = 1e-8
    seed: int = 0
    output: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**data).validate()
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def validate(self) -> "ExperimentConfig":
        if not isinstance(self.p, int) or isinstance(self.p, bool) or self.p < 2 or self.p % 2:
            raise ConfigError(f"p must be an even integer >= 2, got {self.p!r}")
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if self.alpha is not None:
            if len(self.alpha) != self.p:
                raise ConfigError(f"alpha has {len(self.alpha)} entries, expected p = {self.p}")
            try:
                a = np.array([complex(float(re), float(im)) for re, im in self.alpha])
            except (TypeError, ValueError) as exc:
                raise ConfigError("alpha entries must be [re, im] pairs") from exc
            if not np.all(np.abs(a) < 1):
                raise ConfigError("every |alpha_j| must be < 1")
        h = self.hamiltonian
        if not isinstance(h, dict) or "kind" not in h:
            raise ConfigError("hamiltonian must be an object with a 'kind'")
        if h["kind"] not in KINDS:
            raise ConfigError(f"hamiltonian kind must be one of {KINDS}, got {h['kind']!r}")
        try:
            self.spec.validate(self.p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not math.isfinite(self.t_end):
            raise ConfigError("t_end must be finite")
        if self.command in ("simulate", "factor-flow") and not self.dt > 0:
            raise ConfigError("dt must be positive")
        for name in ("h_samples", "truncation"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        return self

    @property
    def spec(self) -> HamiltonianSpec:
        return HamiltonianSpec(self.hamiltonian["kind"], int(self.hamiltonian.get("n", 0)))

    def vector(self) -> VerblunskyVector:
        if self.alpha is None:
            return VerblunskyVector.random(SplitMix64(self.seed), self.p)
        return VerblunskyVector(np.array([complex(re, im) for re, im in self.alpha]))


# output -------------------------------------------------------------------

def _encode(x) -> str:
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in x) + "]"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    if isinstance(x, (complex, np.complexfloating)):
        return _encode([x.real, x.imag])
    if x is None:
        return "null"
    return json.dumps(str(x))


def dumps(obj) -> str:
    """JSON text with every float printed to 17 significant digits."""
    return _encode(obj) + "\n"


def write_json(obj, path):
    Path(path).write_text(dumps(obj))


def _threads() -> int:
    raw = os.environ.get("CMVFLOWS_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def _parallel(fn, items):
    # results come back in trial order whatever the scheduling
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# commands ---------------------------------------------------------------

def cmd_simulate(cfg: ExperimentConfig, out: Path):
    v = cfg.vector()
    spec = cfg.spec
    traj = integrate_ode(v, spec, cfg.t_end, cfg.dt)
    traj.write_csv(out)
    drift = traj.max_drift()
    summary = {"p": cfg.p, "hamiltonian": {"kind": spec.kind, "n": spec.n}, "t_end": cfg.t_end,
               "dt": cfg.dt, "steps": len(traj.times) - 1,
               "initial": v.to_json(), "final": traj.final.to_json(),
               "max_drift": {"P": drift[0], "I": drift[1], "K": drift[2]}}
    if spec.kind == "P":
        summary["closed_form_gap"] = traj.final.distance(p_flow_exact(v, cfg.t_end))
    write_json(summary, out.with_suffix(".summary.json"))
    return 0


def cmd_invariants(cfg, out):
    write_json(invariants(cfg.vector()).to_json(), out)
    return 0


def cmd_curve(cfg, out):
    try:
        data = dirichlet_data(cfg.vector())
    except (NonGenericError, BranchProximityError, DirichletProximityError, RuntimeError) as exc:
        raise NumericalFailure("curve", str(exc)) from exc
    write_json(data.to_json(), out)
    return 0


def _orbit_trial(args):
    i, seed, p, N, tol, M = args
    g = checks.planted_analytic_loop(SplitMix64(seed + 7919 * i), p, lower=False)
    try:
        d = dressing_action(g, coxeter_element(p).assembled, N, 1e-10, M)
    except FactorizationError as exc:
        return {"trial": i, "recognized": False, "error": str(exc), "pass": False}
    w = recognize_floquet(d.loop, tol)
    res = build_factors(w).assembled.max_abs_diff(d.loop) if w is not None else math.inf
    return {"trial": i, "recognized": w is not None, "residual": res, "line_gap": d.line_gap,
            "alpha": w.to_json()["alpha"] if w is not None else None,
            "pass": bool(w is not None and res < tol and d.line_gap < tol)}


def cmd_orbit_check(cfg, out):
    rows = _parallel(_orbit_trial, [(i, cfg.seed, cfg.p, cfg.truncation, cfg.tolerance, cfg.h_samples)
                                    for i in range(TRIALS)])
    ok = all(r["pass"] for r in rows)
    write_json({"p": cfg.p, "seed": cfg.seed, "tolerance": cfg.tolerance, "trials": rows, "pass": ok}, out)
    return 0 if ok else 3


def _bracket_trial(args):
    i, v, tol = args
    inv = involution_check(v, tol)
    skl = 0.0
    for a in range(v.p):
        for b in range(v.p):
            c = complex_coordinate_bracket(sklyanin_coordinate_brackets(v, a, b))
            skl = max(skl, abs(c - (2j * v.rho[a] ** 2 if a == b else 0.0)))
    return {"trial": i, "alpha": v.to_json()["alpha"], "involution_max": inv["max_abs"],
            "sklyanin_max": skl, "pass": bool(inv["pass"] and skl < tol)}


def cmd_bracket_check(cfg, out):
    rng = SplitMix64(cfg.seed)
    vs = [cfg.vector()] if cfg.alpha is not None else []
    vs += [VerblunskyVector.random(rng, cfg.p) for _ in range(TRIALS - len(vs))]
    rows = _parallel(_bracket_trial, [(i, v, cfg.tolerance) for i, v in enumerate(vs)])
    ok = all(r["pass"] for r in rows)
    write_json({"p": cfg.p, "seed": cfg.seed, "tolerance": cfg.tolerance, "trials": rows, "pass": ok}, out)
    return 0 if ok else 3


def cmd_factor_flow(cfg, out):
    v = cfg.vector()
    spec = cfg.spec
    try:
        w, log = flow_by_factorization(v, spec, cfg.t_end, cfg.truncation, 1e-10, cfg.h_samples, details=True)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ode = integrate_ode(v, spec, cfg.t_end, cfg.dt).final
    gap = float(np.max(np.abs(w.alpha - ode.alpha)))
    report = {"p": cfg.p, "hamiltonian": {"kind": spec.kind, "n": spec.n}, "t_end": cfg.t_end,
              "factorization": w.to_json(), "ode": ode.to_json(), "endpoint_gap": gap,
              "spectral_residual": max(s.spectral_residual for s in log) if log else 0.0,
              "h_gap": max(s.h_gap for s in log) if log else 0.0,
              "pass": bool(gap < cfg.tolerance)}
    write_json(report, out)
    return 0 if report["pass"] else 3


def cmd_verify(cfg, out):
    results = checks.run_all(seed_offset=cfg.seed)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    write_json({"seed": cfg.seed, "checks": [r.to_json() for r in results], "pass": ok}, out)
    return 0 if ok else 3


HANDLERS = {"simulate": cmd_simulate, "invariants": cmd_invariants, "curve": cmd_curve,
            "orbit-check": cmd_orbit_check, "bracket-check": cmd_bracket_check,
            "factor-flow": cmd_factor_flow, "verify": cmd_verify}
DEFAULT_OUTPUT = {"simulate": "trajectory.csv"}


def load_config(path, command=None, seed=None, output=None) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if isinstance(data, dict):
        if command is not None:
            data["command"] = command
        if seed is not None:
            data["seed"] = seed
        if output is not None:
            data["output"] = output
    return ExperimentConfig.from_dict(data)


def run(cfg: ExperimentConfig) -> int:
    out = Path(cfg.output or DEFAULT_OUTPUT.get(cfg.command, f"{cfg.command}.json"))
    try:
        return HANDLERS[cfg.command](cfg, out)
    except (FactorizationError, BoundaryApproachError) as exc:
        stage = getattr(exc, "stage", "ode")
        raise NumericalFailure(stage, str(exc)) from exc
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("linear algebra", str(exc)) from exc


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cmvflows", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True)
    ap.add_argument("--output")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config, args.command, args.seed, args.output)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
