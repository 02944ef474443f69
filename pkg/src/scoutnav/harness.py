"""Closed-loop episode runner, metrics and the multi-run comparison suite.

One tick is a full perception-plan-act cycle at a fixed robot speed;
traversal time is therefore reported in ticks. An episode is fully
deterministic given (scenario, config, seed): a single rng stream feeds
node sampling and particle projection in fixed pipeline order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import LrnState, lrn_select_heading, vanilla_plan
from .config import POLICIES, RunConfig
from .navgraph import NavGraph, update_navigation_graph
from .planner import plan, step_robot
from .scoring import ScoreContext, score_graph
from .sensors import CameraRig, render_vision, sense_geometric, write_pgm
from .triangulation import GoalTracker
from .world import Scenario

SUCCESS = "Success"
BUDGET = "Budget exhausted"
STUCK = "Stuck"

TICK_FIELDS = (
    "tick",
    "x",
    "y",
    "heading",
    "goal_x",
    "goal_y",
    "exit_node",
    "exit_bin",
    "aux_cost",
    "path_len",
    "g_local_x",
    "g_local_y",
    "n_nodes",
    "n_edges",
    "n_frontier",
    "view_count",
    "est_x",
    "est_y",
    "weight_mass",
    "est_err",
    "blocked",
)


@dataclass
class TickRecord:
    tick: int
    x: float
    y: float
    heading: float
    goal_x: float
    goal_y: float
    exit_node: int | None
    exit_bin: int | None
    aux_cost: float
    path_len: int
    g_local_x: float
    g_local_y: float
    n_nodes: int
    n_edges: int
    n_frontier: int
    view_count: int
    est_x: float
    est_y: float
    weight_mass: float
    est_err: float
    blocked: bool

    def as_row(self) -> list:
        return [getattr(self, name) for name in TICK_FIELDS]


@dataclass
class EpisodeLog:
    scenario_name: str
    policy: str
    seed: int
    outcome: str
    ticks: int
    trajectory_length: float
    records: list[TickRecord] = field(default_factory=list)
    exit_switches: int = 0
    scenario: Scenario | None = field(default=None, repr=False)
    graph_snapshots: list[dict] = field(default_factory=list, repr=False)

    @property
    def trace(self) -> np.ndarray:
        """(ticks + 1, 2) visited positions including the start."""
        if not self.records:
            return np.zeros((0, 2))
        start = self.scenario.start if self.scenario else (self.records[0].x, self.records[0].y)
        pts = [(start[0], start[1])]
        pts.extend((r.x, r.y) for r in self.records)
        return np.array(pts)

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(TICK_FIELDS)
        for record in self.records:
            writer.writerow(record.as_row())
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _graph_snapshot(graph: NavGraph, tick: int) -> dict:
    return {
        "tick": tick,
        "nodes": [
            {
                "id": i,
                "x": float(graph.nodes[i].position[0]),
                "y": float(graph.nodes[i].position[1]),
                "r_f": graph.nodes[i].r_f,
                "r_e": graph.nodes[i].r_e,
                "frontier": graph.nodes[i].is_frontier,
                "scores": [float(s) for s in graph.nodes[i].scores],
                "score_distance": None
                if math.isinf(graph.nodes[i].score_distance)
                else graph.nodes[i].score_distance,
            }
            for i in graph.node_ids()
        ],
        "edges": [[i, j, length] for i, j, length in graph.edges()],
    }


def run_episode(
    scenario: Scenario,
    config: RunConfig,
    policy: str | None = None,
    seed: int | None = None,
    collect_snapshots: bool = False,
    snapshot_path: str | Path | None = None,
    frame_dump_dir: str | Path | None = None,
) -> EpisodeLog:
    """Run one closed-loop episode of the selected policy.

    Per tick: geometric sensing, graph update, vision rendering, goal
    update, frontier scoring, planning and one robot step. Ends on goal
    reached, exhausted budget, or a stuck condition (planner failure or a
    blocked robot for too many consecutive ticks).
    """
    config.validate()
    policy = policy or config.policy
    if policy not in POLICIES:
        raise ValueError(f"policy: must be one of {POLICIES}")
    seed = scenario.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    rig = CameraRig.from_config(config)
    ctx = ScoreContext(
        tau_trav=config.tau_trav,
        tau_front=config.tau_front,
        s_def=config.s_def,
        d_score_max=config.d_score_max,
        n_bins=config.n_bins,
        eps_pix=config.eps_pix,
    )
    world = scenario.world
    pose = np.array(scenario.start, dtype=np.float64)
    graph = NavGraph(n_bins=config.n_bins, s_def=config.s_def)
    tracker = GoalTracker(
        g0=scenario.goal,
        r_max=config.r_max,
        n_p=config.n_p,
        d_min=config.d_min,
        d_max=config.d_max,
        eps=config.eps_ray,
        view_cap=config.view_cap,
    )
    lrn_state = LrnState.from_start_heading(scenario.start[2])
    prev_frontier_ids: set[int] = set()
    success_ref = np.array(scenario.success_reference())
    true_target = None
    if scenario.query is not None:
        tgt = world.find_target(scenario.query)
        if tgt is not None:
            true_target = np.array(tgt.position)

    log = EpisodeLog(
        scenario_name=scenario.name,
        policy=policy,
        seed=seed,
        outcome=BUDGET,
        ticks=0,
        trajectory_length=0.0,
        scenario=scenario,
    )
    snapshot_file = open(snapshot_path, "w") if snapshot_path else None
    if frame_dump_dir:
        Path(frame_dump_dir).mkdir(parents=True, exist_ok=True)

    blocked_streak = 0
    prev_exit: int | None = None
    outcome = None
    ticks = 0
    try:
        if float(np.hypot(*(pose[:2] - success_ref))) <= config.d_reach:
            outcome = SUCCESS if scenario.budget > 0 else BUDGET
        for tick in range(scenario.budget):
            if outcome is not None:
                break
            grid = sense_geometric(world, pose, config.r_max)
            update_navigation_graph(
                graph,
                grid,
                n_samples=config.n_samples,
                r_trav=config.r_trav,
                r_f_max=config.r_f_max,
                r_edge=config.r_edge,
                rng=rng,
            )
            frames = render_vision(
                world, rig, pose, scenario.query, tick, robot_diameter=config.robot_diameter
            )
            if frame_dump_dir:
                for f in frames:
                    base = Path(frame_dump_dir) / f"tick{tick:04d}_{f.name}"
                    write_pgm(f"{base}_tvis.pgm", f.t_vis)
                    write_pgm(f"{base}_fvis.pgm", f.f_vis)
                    write_pgm(f"{base}_svis.pgm", f.s_vis)
            active_goal = np.array(tracker.update(frames, rng, tick))
            if policy == "wildos":
                score_graph(graph, frames, pose[:2], ctx, prev_frontier_ids)

            exit_node = exit_bin = None
            aux_cost = 0.0
            path_len = 0
            blocked = False
            if policy == "lrn":
                chosen, g_local = lrn_select_heading(
                    frames, active_goal, pose, lrn_state, ctx, config.r_max
                )
                exit_bin = chosen
            else:
                planner_fn = plan if policy == "wildos" else vanilla_plan
                kwargs = dict(d_local=config.d_local, coarse_resolution=config.coarse_resolution)
                if policy == "wildos":
                    kwargs.update(alpha=config.alpha, eps_z=config.eps_z)
                result = planner_fn(graph, pose[:2], active_goal, ctx.bin_index, **kwargs)
                if result is None:
                    g_local = None
                else:
                    g_local = result.g_local
                    exit_node = result.exit_frontier
                    exit_bin = result.exit_bin
                    aux_cost = result.aux_cost
                    path_len = len(result.node_path)
                    if exit_node is not None:
                        if prev_exit is not None and exit_node != prev_exit:
                            log.exit_switches += 1
                        prev_exit = exit_node

            if g_local is None:
                blocked = True
                new_pose = pose
            else:
                new_pose, blocked = step_robot(
                    world, pose, g_local, config.speed, config.r_max
                )
            moved = float(np.hypot(*(new_pose[:2] - pose[:2])))
            log.trajectory_length += moved
            blocked_streak = blocked_streak + 1 if (blocked or moved == 0.0) else 0
            pose = new_pose
            ticks = tick + 1

            est = tracker.estimate
            est_err = math.nan
            if est is not None and true_target is not None:
                est_err = float(np.hypot(*(est.position[:2] - true_target)))
            log.records.append(
                TickRecord(
                    tick=tick,
                    x=float(pose[0]),
                    y=float(pose[1]),
                    heading=float(pose[2]),
                    goal_x=float(active_goal[0]),
                    goal_y=float(active_goal[1]),
                    exit_node=exit_node,
                    exit_bin=exit_bin,
                    aux_cost=aux_cost,
                    path_len=path_len,
                    g_local_x=float(g_local[0]) if g_local is not None else math.nan,
                    g_local_y=float(g_local[1]) if g_local is not None else math.nan,
                    n_nodes=len(graph.nodes),
                    n_edges=graph.n_edges,
                    n_frontier=len(graph.frontier_ids()),
                    view_count=len(tracker.views),
                    est_x=float(est.position[0]) if est else math.nan,
                    est_y=float(est.position[1]) if est else math.nan,
                    weight_mass=est.total_weight if est else 0.0,
                    est_err=est_err,
                    blocked=blocked,
                )
            )
            if collect_snapshots or snapshot_file:
                snap = _graph_snapshot(graph, tick)
                if collect_snapshots:
                    log.graph_snapshots.append(snap)
                if snapshot_file:
                    snapshot_file.write(json.dumps(snap) + "\n")

            prev_frontier_ids = set(graph.frontier_ids())
            if float(np.hypot(*(pose[:2] - success_ref))) <= config.d_reach:
                outcome = SUCCESS
            elif blocked_streak >= config.stuck_ticks:
                outcome = STUCK
    finally:
        if snapshot_file:
            snapshot_file.close()

    log.outcome = outcome if outcome is not None else BUDGET
    log.ticks = ticks
    return log


def count_region_entries(trace: np.ndarray, rect: tuple[float, float, float, float]) -> int:
    """Number of outside-to-inside transitions of the trace into a rectangle.

    rect is (x_lo, y_lo, x_hi, y_hi). A revisit cycle shows up as an entry
    count of at least 2.
    """
    x_lo, y_lo, x_hi, y_hi = rect
    entries = 0
    inside = False
    for x, y in np.asarray(trace):
        now = x_lo <= x <= x_hi and y_lo <= y <= y_hi
        if now and not inside:
            entries += 1
        inside = now
    return entries


SUITE_FIELDS = (
    "scenario",
    "policy",
    "seed",
    "outcome",
    "ticks",
    "trajectory_m",
    "exit_switches",
    "blocked_ticks",
    "final_est_err",
)


@dataclass
class SuiteResult:
    rows: list[dict]

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SUITE_FIELDS)
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def aggregate(self) -> list[dict]:
        """Mean/std of length and ticks plus success rate per scenario+policy."""
        groups: dict[tuple[str, str], list[dict]] = {}
        for row in self.rows:
            groups.setdefault((row["scenario"], row["policy"]), []).append(row)
        out = []
        for (scenario, policy), rows in sorted(groups.items()):
            lengths = np.array([r["trajectory_m"] for r in rows])
            ticks = np.array([r["ticks"] for r in rows])
            out.append(
                {
                    "scenario": scenario,
                    "policy": policy,
                    "runs": len(rows),
                    "success_rate": sum(r["outcome"] == SUCCESS for r in rows) / len(rows),
                    "mean_length": float(lengths.mean()),
                    "std_length": float(lengths.std()),
                    "mean_ticks": float(ticks.mean()),
                    "std_ticks": float(ticks.std()),
                    "mean_switches": float(np.mean([r["exit_switches"] for r in rows])),
                }
            )
        return out

    def summary_table(self) -> str:
        lines = [
            f"{'scenario':<18} {'policy':<8} {'runs':>4} {'success':>8} "
            f"{'length (m)':>16} {'ticks':>14} {'switches':>9}"
        ]
        for a in self.aggregate():
            lines.append(
                f"{a['scenario']:<18} {a['policy']:<8} {a['runs']:>4} "
                f"{a['success_rate']:>8.2f} "
                f"{a['mean_length']:>8.1f}±{a['std_length']:<7.1f} "
                f"{a['mean_ticks']:>7.1f}±{a['std_ticks']:<6.1f} "
                f"{a['mean_switches']:>9.1f}"
            )
        return "\n".join(lines)


def run_suite(
    scenarios: list[Scenario],
    policies: list[str],
    seeds: list[int],
    config: RunConfig,
) -> SuiteResult:
    """Run every (scenario, policy, seed) combination and tabulate."""
    rows = []
    for scenario in scenarios:
        for policy in policies:
            for seed in seeds:
                log = run_episode(scenario, config, policy=policy, seed=seed)
                final_err = math.nan
                if log.records:
                    final_err = log.records[-1].est_err
                rows.append(
                    {
                        "scenario": scenario.name,
                        "policy": policy,
                        "seed": seed,
                        "outcome": log.outcome,
                        "ticks": log.ticks,
                        "trajectory_m": round(log.trajectory_length, 3),
                        "exit_switches": log.exit_switches,
                        "blocked_ticks": sum(r.blocked for r in log.records),
                        "final_est_err": final_err,
                    }
                )
    return SuiteResult(rows=rows)
