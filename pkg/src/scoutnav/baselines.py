"""Comparison policies: memoryless angular-bin heading selection and a
vision-blind variant of the graph planner.

The heading-bin baseline scores a fixed set of directions around the robot
from the current visual frontier maps only, weighs them by goal alignment
and by agreement with its previous heading, and walks toward the edge of
the sensing window in the winning direction. It keeps no memory beyond
that previous heading. The vision-blind baseline runs the full graph
planner with the score-to-cost scale pinned to the constant 2, so
auxiliary goal edges cost twice their safe distance regardless of scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .navgraph import NavGraph
from .planner import PlanResult, plan
from .scoring import ScoreContext
from .sensors import VisionFrame


@dataclass
class LrnState:
    """Smoothing state: the previously chosen heading (unit vector)."""

    prev_heading: np.ndarray
    switches: int = 0
    no_frontier_ticks: int = 0
    last_bin: int | None = field(default=None)

    @classmethod
    def from_start_heading(cls, heading: float) -> "LrnState":
        return cls(prev_heading=np.array([math.cos(heading), math.sin(heading)]))


def lrn_bin_scores(
    frames: list[VisionFrame], ctx: ScoreContext
) -> np.ndarray:
    """Per-bin visual frontier mass, merged across cameras by max.

    Pixel values at or below the frontier threshold are dropped, each
    camera's bin sums are normalized by that bin's pixel capacity in the
    camera, and overlapping cameras merge by taking the larger value.
    """
    scores = np.zeros(ctx.n_bins)
    for frame in frames:
        h, w = frame.image_shape
        azim = frame.column_azimuths()
        width = 2.0 * math.pi / ctx.n_bins
        ang = np.arctan2(azim[:, 1], azim[:, 0])
        col_bins = np.floor(ang / width + 0.5).astype(int) % ctx.n_bins
        vals = np.where(frame.f_vis > ctx.tau_front, frame.f_vis, 0.0)
        col_sums = vals.sum(axis=0)
        cam_scores = np.zeros(ctx.n_bins)
        for b in range(ctx.n_bins):
            cols = col_bins == b
            capacity = cols.sum() * h
            if capacity:
                cam_scores[b] = col_sums[cols].sum() / capacity
        scores = np.maximum(scores, cam_scores)
    return scores


def lrn_select_heading(
    frames: list[VisionFrame],
    goal: np.ndarray,
    pose: np.ndarray,
    state: LrnState,
    ctx: ScoreContext,
    r_max: float,
) -> tuple[int | None, np.ndarray]:
    """Pick the best heading bin and place a short-range goal toward it.

    Frontier mass per bin is multiplied by goal-alignment and
    previous-heading-alignment factors (both in [0.5, 1]); the argmax bin
    wins. With no frontier mass anywhere the previous heading is kept.
    """
    pose = np.asarray(pose, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    frontier = lrn_bin_scores(frames, ctx)
    headings = ctx.bin_headings
    offset = goal - pose[:2]
    norm = float(np.hypot(*offset))
    goal_dir = offset / norm if norm > 0 else np.array([1.0, 0.0])
    goal_term = (3.0 + headings @ goal_dir) / 4.0
    smooth_term = (3.0 + headings @ state.prev_heading) / 4.0
    combined = frontier * goal_term * smooth_term

    if not combined.any():
        state.no_frontier_ticks += 1
        direction = state.prev_heading
        chosen: int | None = None
    else:
        chosen = int(np.argmax(combined))
        direction = headings[chosen]
        if state.last_bin is not None and chosen != state.last_bin:
            state.switches += 1
        state.last_bin = chosen
        state.prev_heading = direction.copy()
    g_local = pose[:2] + direction * (r_max * 0.95)
    return chosen, g_local


def vanilla_plan(
    graph: NavGraph,
    robot_xy: np.ndarray,
    goal: np.ndarray,
    bin_index_fn,
    d_local: float = 5.0,
    coarse_resolution: float = 2.0,
) -> PlanResult | None:
    """Graph planning with uniform auxiliary edge weighting (scale = 2)."""
    return plan(
        graph,
        robot_xy,
        goal,
        bin_index_fn,
        d_local=d_local,
        coarse_resolution=coarse_resolution,
        z_fn=lambda s: 2.0,
    )
