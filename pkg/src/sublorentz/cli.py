"""Batch front-end: problem configs in, reports and plot data out.

Exit codes: 0 success, 1 failed checks or unsolved problems, 2 config errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import RunConfig, load_config
from .cones import check_antinorm_axioms, find_time_covector, is_pointed
from .dynamics import ControlSignal, integrate, trajectory_to_csv
from .errors import ConfigError, SubLorentzError
from .groups import HyperbolicPlane, natural_metric
from .solver import SolveStatus, reachability_sample, solve_longest
from .timeform import (
    check_growth_condition,
    exterior_derivative_fd,
    is_exact,
    potential,
    tau_duration,
)
from .verify import run_all


def _jsonable(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


@dataclass
class RunReport:
    """Machine-readable result record plus its human-readable rendering."""

    subcommand: str
    status: str
    seed: int
    payload: Dict
    text: List[str] = field(default_factory=list)
    artifacts: Dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        record = {"subcommand": self.subcommand, "status": self.status,
                  "seed": self.seed, **self.payload}
        return json.dumps(record, sort_keys=True, indent=2,
                          default=_jsonable) + "\n"

    def summary(self) -> str:
        return "\n".join([f"[{self.subcommand}] {self.status}"] + self.text)


def emit_report(report: RunReport, out_dir: str) -> List[str]:
    """Write report.json, summary.txt and the run's CSV artifacts."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, content in [("report.json", report.to_json()),
                          ("summary.txt", report.summary() + "\n"),
                          *report.artifacts.items()]:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
        written.append(path)
    return written


def _history_csv(history) -> str:
    lines = ["iteration,objective"]
    lines += [f"{i},{v:.17g}" for i, v in enumerate(history)]
    return "\n".join(lines) + "\n"


def _cloud_csv(points: np.ndarray, model) -> str:
    if isinstance(model, HyperbolicPlane):
        names = ["x", "y"]
    else:
        names = [f"x{i}" for i in range(points.shape[1])]
    lines = [",".join(names)]
    lines += [",".join(f"{c:.17g}" for c in row) for row in points]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommand runners
# ---------------------------------------------------------------------------


def _run_solve(cfg: RunConfig) -> Tuple[int, RunReport]:
    prob = cfg.instance()
    rep = solve_longest(prob, cfg.solver_options)
    ok = rep.status == SolveStatus.SOLVED
    payload = {
        "solver_status": rep.status.value,
        "objective": rep.objective,
        "endpoint_residual": rep.endpoint_residual,
        "iterations": rep.iterations,
        "segments": prob.segments,
        "history": list(rep.history),
    }
    report = RunReport("solve", "ok" if ok else rep.status.value,
                       cfg.solver_options.seed, payload,
                       text=[rep.summary()])
    if rep.trajectory is not None:
        report.artifacts["trajectory.csv"] = trajectory_to_csv(rep.trajectory)
        report.artifacts["history.csv"] = _history_csv(rep.history)
    return (0 if ok else 1), report


def _run_check_structure(cfg: RunConfig) -> Tuple[int, RunReport]:
    if cfg.cone is None or cfg.antinorm is None:
        raise ConfigError("check-structure needs 'cone' and 'antinorm'", field="cone")
    pointed = is_pointed(cfg.cone)
    payload: Dict = {"pointed": pointed}
    text = [f"cone pointed: {pointed}"]
    ok = pointed
    if pointed:
        tc = find_time_covector(cfg.cone)
        payload["time_covector"] = tc.components.tolist()
        payload["covector_margin"] = tc.margin
        text.append(f"time covector {np.round(tc.components, 9).tolist()} "
                    f"margin {tc.margin:.6g}")
        ok = ok and tc.margin > 1e-12
    axioms = check_antinorm_axioms(cfg.antinorm, cfg.cone,
                                   sample_count=cfg.samples, seed=cfg.seed)
    payload["antinorm_axioms_passed"] = axioms.passed
    payload["antinorm_counterexample"] = axioms.counterexample
    text.append(axioms.summary())
    ok = ok and axioms.passed
    return (0 if ok else 1), RunReport("check-structure", "ok" if ok else "failed",
                                       cfg.seed, payload, text=text)


def _run_check_timeform(cfg: RunConfig) -> Tuple[int, RunReport]:
    if cfg.model is None or cfg.timeform is None:
        raise ConfigError("check-timeform needs 'model' and 'timeform'",
                          field="timeform")
    form = cfg.timeform
    model = cfg.model
    rng = np.random.default_rng(cfg.seed)
    basis = np.eye(model.point_dim)
    worst = 0.0
    for _ in range(20):
        if isinstance(model, HyperbolicPlane):
            p = np.array([rng.uniform(-2, 2), rng.uniform(0.5, 3.0)])
        else:
            p = rng.uniform(-2, 2, model.point_dim)
        # coordinate stencils: dtau components in the chart basis
        for i in range(model.point_dim):
            for j in range(i + 1, model.point_dim):
                worst = max(worst, abs(exterior_derivative_fd(
                    form, p, basis[i], basis[j], 1e-3)))
    closed = worst <= 1e-8
    payload: Dict = {"max_sampled_dtau": worst, "closed": closed}
    text = [f"max sampled |dtau| = {worst:.3g} -> "
            f"{'closed' if closed else 'NOT closed'}"]
    ok = closed

    if cfg.cone is not None:
        growth = check_growth_condition(form, cfg.cone, natural_metric(model),
                                        samples=cfg.samples, seed=cfg.seed)
        payload["growth_passed"] = growth.passed
        payload["growth_rho"] = None if np.isinf(growth.rho) else growth.rho
        payload["growth_tau_scale"] = None if np.isinf(growth.tau_scale) \
            else growth.tau_scale
        text.append(growth.summary())
        ok = ok and growth.passed

    exact = is_exact(form)
    payload["exact"] = exact
    if exact and cfg.cone is not None:
        worst_gap = 0.0
        for _ in range(10):
            u = ControlSignal(cfg.cone.sample(int(rng.integers(1, 9)), rng))
            traj = integrate(model, model.identity(), u)
            gap = abs(tau_duration(traj, form)
                      - (potential(form, traj.endpoint)
                         - potential(form, model.identity())))
            worst_gap = max(worst_gap, gap)
        payload["potential_consistency_gap"] = worst_gap
        text.append(f"potential consistency: max gap {worst_gap:.3g}")
        ok = ok and worst_gap <= 1e-8
    elif not exact:
        text.append("form is not exact on this model (no potential)")
    return (0 if ok else 1), RunReport("check-timeform", "ok" if ok else "failed",
                                       cfg.seed, payload, text=text)


def _run_reach(cfg: RunConfig) -> Tuple[int, RunReport]:
    if cfg.model is None or cfg.cone is None or cfg.x0 is None:
        raise ConfigError("reach needs 'model', 'cone' and endpoints.x0",
                          field="model")
    cloud = reachability_sample(cfg.model, cfg.cone, cfg.x0, cfg.samples,
                                seed=cfg.seed)
    payload = {
        "n_samples": int(cloud.shape[0]),
        "coordinate_mins": cloud.min(axis=0).tolist(),
        "coordinate_maxes": cloud.max(axis=0).tolist(),
    }
    text = [f"sampled {cloud.shape[0]} reachable endpoints from "
            f"{np.asarray(cfg.x0).tolist()}"]
    report = RunReport("reach", "ok", cfg.seed, payload, text=text)
    report.artifacts["cloud.csv"] = _cloud_csv(cloud, cfg.model)
    return 0, report


def _run_verify(cfg: Optional[RunConfig], seed: int) -> Tuple[int, RunReport]:
    results = run_all(seed)
    n_pass = sum(r.passed for r in results)
    payload = {
        "checks_total": len(results),
        "checks_passed": n_pass,
        "results": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                    for r in results],
    }
    text = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}"
            for r in results]
    text.append(f"{n_pass}/{len(results)} invariants pass")
    ok = n_pass == len(results)
    return (0 if ok else 1), RunReport("verify", "ok" if ok else "failed",
                                       seed, payload, text=text)


def run_config(path: Optional[str], subcommand: str, seed: Optional[int] = None,
               out_dir: Optional[str] = None) -> Tuple[int, RunReport]:
    """Load, validate, dispatch; returns (exit status, report)."""
    cfg = load_config(path) if path is not None else None
    if cfg is not None and seed is not None:
        cfg.seed = seed
        cfg.solver_options = replace(cfg.solver_options, seed=seed)
    if subcommand == "verify":
        code, report = _run_verify(cfg, seed if seed is not None
                                   else (cfg.seed if cfg else 0))
    else:
        if cfg is None:
            raise ConfigError(f"{subcommand} needs --config")
        runner = {"solve": _run_solve,
                  "check-structure": _run_check_structure,
                  "check-timeform": _run_check_timeform,
                  "reach": _run_reach}[subcommand]
        code, report = runner(cfg)
    target = out_dir or (cfg.output_dir if cfg else None)
    if target:
        emit_report(report, target)
    return code, report


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sublorentz",
        description="Pose, check, and solve sub-Lorentzian longest-path problems.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, needs_config in [("solve", True), ("check-structure", True),
                               ("check-timeform", True), ("reach", True),
                               ("verify", False)]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config,
                       help="JSON problem configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)
    try:
        code, report = run_config(args.config, args.subcommand,
                                  seed=args.seed, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SubLorentzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.summary())
    return code


if __name__ == "__main__":
    sys.exit(main())
