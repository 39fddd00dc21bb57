"""Command-line front end for experiments and exact evaluation."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .abstraction import WorldviewCapError
from .domains import build_problem
from .planner import PHASE_NAMES, PlannerConfig
from .simulate import (
    RunConfig,
    run_precursor,
    run_recurrent,
    save_snapshot,
    write_trace_csv,
)
from .space import SpaceError

ENV_OUT_DIR = "WVPLAN_OUT_DIR"
ENABLEABLE = ("policy-refine", "proximity-refine", "proximity-coarsen")


@dataclass
class ExperimentSpec:
    problem: str = "3doors"
    mode: str = "precursor"
    gamma: float = 0.95
    gamma_p: float = 0.95
    replanning: float = 0.1
    n_sweeps: int = 10
    variant: str = "lua"
    refine_threshold: float | None = None
    coarsen_threshold: float | None = None
    enable: list = field(default_factory=list)
    phases: int = 1000
    phases_per_step: int = 20
    steps: int = 500
    seeds: int = 1
    seed: int = 0
    no_reward_step: bool = False
    no_nexus_step: bool = False
    eval_exact: bool = False
    eval_snapshot: str | None = None
    out_dir: str | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        data = json.loads(text)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise SpaceError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def planner_config(self) -> PlannerConfig:
        for name in self.enable:
            if name not in ENABLEABLE:
                raise SpaceError(
                    f"unknown phase {name!r}; choose from {ENABLEABLE}")
        weights = {"policy-value": 1.0}
        weights.update({name: 1.0 for name in self.enable})
        return PlannerConfig(
            gamma=self.gamma, gamma_p=self.gamma_p,
            replanning_probability=self.replanning,
            n_sweeps=self.n_sweeps, variant=self.variant,
            refine_threshold=self.refine_threshold,
            coarsen_threshold=self.coarsen_threshold,
            phase_weights=weights,
            initial_reward_step=not self.no_reward_step,
            initial_nexus_step=not self.no_nexus_step,
        )

    def resolve_out_dir(self) -> Path:
        out = self.out_dir or os.environ.get(ENV_OUT_DIR) or "."
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        return path


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wvplan",
        description="Plan factored MDPs over dynamically refined "
                    "non-uniform abstractions.",
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--problem",
                        help="3doors|1key|3keys|shuttlebot|10x10|"
                             "robot4:<k>|tireworld[:<graph-file>]")
    parser.add_argument("--mode", choices=["precursor", "recurrent"])
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--gamma-p", dest="gamma_p", type=float)
    parser.add_argument("--replanning", type=float)
    parser.add_argument("--n-sweeps", dest="n_sweeps", type=int)
    parser.add_argument("--variant", choices=["simple", "lua"])
    parser.add_argument("--refine-threshold", dest="refine_threshold", type=float)
    parser.add_argument("--coarsen-threshold", dest="coarsen_threshold", type=float)
    parser.add_argument("--enable", action="append",
                        help="extra phase (repeatable): " + "|".join(ENABLEABLE))
    parser.add_argument("--phases", type=int, help="precursor phase budget")
    parser.add_argument("--phases-per-step", dest="phases_per_step", type=int)
    parser.add_argument("--steps", type=int, help="recurrent world-step limit")
    parser.add_argument("--seeds", type=int, help="number of seeded runs")
    parser.add_argument("--seed", type=int, help="base seed")
    parser.add_argument("--no-reward-step", dest="no_reward_step",
                        action="store_true", default=None)
    parser.add_argument("--no-nexus-step", dest="no_nexus_step",
                        action="store_true", default=None)
    parser.add_argument("--eval-exact", dest="eval_exact",
                        action="store_true", default=None,
                        help="print the exact optimal value at the start state")
    parser.add_argument("--eval-snapshot", dest="eval_snapshot",
                        help="exactly evaluate a saved policy snapshot")
    parser.add_argument("--out-dir", dest="out_dir",
                        help=f"output directory (default ${ENV_OUT_DIR} or .)")
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    if args.config:
        with open(args.config) as fh:
            spec = ExperimentSpec.from_json(fh.read())
    else:
        spec = ExperimentSpec()
    for f in dataclasses.fields(ExperimentSpec):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(spec, f.name, value)
    return spec


def _print_header(spec: ExperimentSpec, out) -> None:
    print("# settings:", file=out)
    for line in spec.to_json().splitlines():
        print(f"#   {line}", file=out)


def run_experiment(spec: ExperimentSpec, out=None) -> int:
    if out is None:
        out = sys.stdout
    problem = build_problem(spec.problem)
    if spec.eval_exact:
        from .oracle import solve_exact, value_at
        solution = solve_exact(problem, spec.gamma)
        print(f"V*(s0) = {value_at(problem, solution):.4f} "
              f"(problem {problem.name}, gamma {spec.gamma})", file=out)
        return 0
    if spec.eval_snapshot:
        from .oracle import evaluate_policy_exact
        from .simulate import load_snapshot
        snapshot = load_snapshot(problem.space, spec.eval_snapshot)
        evaluation = evaluate_policy_exact(problem, snapshot, spec.gamma)
        idx = problem.space.state_index(problem.initial_state)
        print(f"V_policy(s0) = {evaluation.value[idx]:.4f}", file=out)
        return 0

    _print_header(spec, out)
    planner = spec.planner_config()
    out_dir = spec.resolve_out_dir()
    can_eval = problem.space.size() <= 10 ** 6
    summary_rows = []
    for i in range(spec.seeds):
        seed = spec.seed + i
        run = RunConfig(
            mode=spec.mode, planner=planner, seed=seed,
            phase_budget=spec.phases, phases_per_step=spec.phases_per_step,
            world_step_limit=spec.steps,
        )
        if spec.mode == "precursor":
            result = run_precursor(problem, run)
            snap_path = out_dir / f"{problem.name}-seed{seed}-snapshot.json"
            save_snapshot(result.snapshot, snap_path)
            exact = ""
            if can_eval:
                from .oracle import evaluate_policy_exact
                evaluation = evaluate_policy_exact(
                    problem, result.snapshot, spec.gamma)
                exact = f"{evaluation.value[problem.space.state_index(problem.initial_state)]:.4f}"
            row = {
                "seed": seed, "final_worldview": result.worldview_size,
                "self_estimate": f"{result.self_estimate:.4f}",
                "exact_value": exact, "goal_reached": "",
                "phases_total": result.state.phases_total,
            }
        else:
            trace = run_recurrent(problem, run)
            trace_path = out_dir / f"{problem.name}-seed{seed}-trace.csv"
            write_trace_csv(trace, problem.space, trace_path)
            row = {
                "seed": seed, "final_worldview": trace.final_worldview_size,
                "self_estimate": "", "exact_value": "",
                "goal_reached": int(trace.goal_reached),
                "phases_total": trace.phases_total,
            }
        summary_rows.append(row)
        print(f"seed {seed}: " + " ".join(f"{k}={v}" for k, v in row.items()
                                          if k != "seed" and v != ""), file=out)
    summary_path = out_dir / f"{problem.name}-{spec.mode}-summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary_rows[0]))
        writer.writeheader()
        writer.writerows(summary_rows)
    print(f"summary written to {summary_path}", file=out)
    return 0


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    spec = spec_from_args(args)
    try:
        return run_experiment(spec)
    except (SpaceError, WorldviewCapError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
