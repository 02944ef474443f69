"""Coarse goal localization from multi-view similarity masks.

Detections beyond the depth range are fused by sampling depth-uncertain
particles along mask-pixel rays and weighting every particle by its
proximity to the centroid rays of all views; the weighted mean is the
coarse goal. Once the object shows up inside the depth range it is
localized directly from the median of the in-range mask points, and the
active navigation goal switches from the operator prior to the estimate.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .sensors import VisionFrame


@dataclass
class ViewRecord:
    """One valid (nonzero-mask) view kept for triangulation."""

    mask: np.ndarray  # (H, W) uint8, at least one nonzero pixel
    rotation: np.ndarray  # (3, 3) camera-to-world
    translation: np.ndarray  # (3,)
    intrinsics: tuple[float, float, float, float]
    tick: int

    def __post_init__(self) -> None:
        if not self.mask.any():
            raise ValueError("mask: a view record needs a nonzero mask")

    def centroid_ray(self) -> tuple[np.ndarray, np.ndarray]:
        """(origin, unit direction) of the camera-center-to-mask-centroid ray."""
        vs, us = np.nonzero(self.mask)
        fx, fy, cx, cy = self.intrinsics
        d_cam = np.array([(us.mean() - cx) / fx, (vs.mean() - cy) / fy, 1.0])
        d = self.rotation @ d_cam
        return self.translation, d / np.linalg.norm(d)


@dataclass
class ParticleCloud:
    """Candidate 3D object positions with the index of the view each came from."""

    positions: np.ndarray  # (N, 3)
    view_indices: np.ndarray  # (N,)

    def __len__(self) -> int:
        return self.positions.shape[0]


@dataclass
class GoalEstimate:
    position: np.ndarray  # (3,)
    total_weight: float
    view_count: int
    tick: int


def project_particles(
    views: list[ViewRecord],
    n_p: int,
    d_min: float,
    d_max: float,
    rng: np.random.Generator,
) -> ParticleCloud:
    """Back-project n_p random mask pixels per view at uniform random depths."""
    if d_min >= d_max:
        raise ValueError("d_min: must be < d_max")
    chunks: list[np.ndarray] = []
    idx: list[np.ndarray] = []
    for i, view in enumerate(views):
        vs, us = np.nonzero(view.mask)
        picks = rng.integers(0, vs.size, size=n_p)
        depths = rng.uniform(d_min, d_max, size=n_p)
        fx, fy, cx, cy = view.intrinsics
        d_cam = np.stack(
            [
                (us[picks] - cx) / fx,
                (vs[picks] - cy) / fy,
                np.ones(n_p),
            ],
            axis=1,
        )
        p_cam = depths[:, None] * d_cam
        chunks.append(p_cam @ view.rotation.T + view.translation[None, :])
        idx.append(np.full(n_p, i))
    if not chunks:
        return ParticleCloud(np.zeros((0, 3)), np.zeros(0, dtype=np.int64))
    return ParticleCloud(np.concatenate(chunks), np.concatenate(idx))


def ray_weighted_triangulation(
    cloud: ParticleCloud, views: list[ViewRecord], eps: float = 0.1
) -> GoalEstimate:
    """Weight each particle by summed inverse distance to the centroid rays."""
    if len(cloud) == 0 or not views:
        raise ValueError("triangulation needs at least one particle and one view")
    weights = np.zeros(len(cloud))
    for view in views:
        origin, direction = view.centroid_ray()
        rel = cloud.positions - origin[None, :]
        along = rel @ direction
        perp = rel - along[:, None] * direction[None, :]
        d = np.linalg.norm(perp, axis=1)
        weights += 1.0 / (d + eps)
    total = float(weights.sum())
    position = (weights[:, None] * cloud.positions).sum(axis=0) / total
    return GoalEstimate(
        position=position,
        total_weight=total,
        view_count=len(views),
        tick=max(v.tick for v in views),
    )


@dataclass
class GoalUpdateRow:
    """One per-update log entry for the triangulation CSV."""

    tick: int
    view_count: int
    estimate: tuple[float, float, float] | None
    total_weight: float


@dataclass
class GoalTracker:
    """Active-goal state machine: prior goal, triangulated, or depth-localized."""

    g0: tuple[float, float]
    r_max: float
    n_p: int = 1000
    d_min: float = 1.0
    d_max: float = 100.0
    eps: float = 0.1
    view_cap: int = 32
    views: deque = field(default_factory=lambda: deque(maxlen=32))
    estimate: GoalEstimate | None = None
    active_goal: tuple[float, float] = (0.0, 0.0)
    log: list[GoalUpdateRow] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.views = deque(maxlen=self.view_cap)
        self.active_goal = (float(self.g0[0]), float(self.g0[1]))

    def update(
        self, frames: list[VisionFrame], rng: np.random.Generator, tick: int
    ) -> tuple[float, float]:
        """Fold this tick's frames into the store and return the active goal."""
        in_range_points: list[tuple[float, float]] = []
        appended = False
        for frame in frames:
            if not frame.s_vis.any():
                continue
            self.views.append(
                ViewRecord(
                    mask=frame.s_vis.copy(),
                    rotation=frame.rotation.copy(),
                    translation=frame.translation.copy(),
                    intrinsics=frame.intrinsics,
                    tick=tick,
                )
            )
            appended = True
            azim = frame.column_azimuths()
            vs, us = np.nonzero(frame.s_vis)
            depths = frame.depth[vs, us]
            close = np.isfinite(depths) & (depths < self.r_max)
            for u, s in zip(us[close], depths[close]):
                gp = frame.translation[:2] + float(s) * azim[u]
                in_range_points.append((float(gp[0]), float(gp[1])))

        if in_range_points:
            pts = np.array(in_range_points)
            self.active_goal = (float(np.median(pts[:, 0])), float(np.median(pts[:, 1])))
        elif len(self.views) >= 2 and appended:
            views = list(self.views)
            cloud = project_particles(views, self.n_p, self.d_min, self.d_max, rng)
            self.estimate = ray_weighted_triangulation(cloud, views, self.eps)
            self.active_goal = (float(self.estimate.position[0]), float(self.estimate.position[1]))

        if appended:
            self.log.append(
                GoalUpdateRow(
                    tick=tick,
                    view_count=len(self.views),
                    estimate=tuple(self.estimate.position) if self.estimate else None,
                    total_weight=self.estimate.total_weight if self.estimate else 0.0,
                )
            )
        return self.active_goal
