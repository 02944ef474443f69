"""Cross-modal frontier scoring over heading bins.

Each geometric frontier node is projected into the camera images and
scored, per goal-heading bin, by the best pixel product of goal alignment,
image-space reachability and visual frontier confidence. Scores are stored
goal-agnostically as a vector over uniformly spaced heading bins so the
planner can look up whichever direction the current goal implies without
re-scoring. A node is re-scored only while the robot keeps getting closer
than it was at the last scoring (or when the node is newly frontier).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .navgraph import NavGraph
from .sensors import VisionFrame


@dataclass(frozen=True)
class ScoreContext:
    """Thresholds and heading discretization used by the scoring stage."""

    tau_trav: float = 0.9
    tau_front: float = 0.6
    s_def: float = 0.3
    d_score_max: float = 9.0
    n_bins: int = 16
    eps_pix: float = 0.05

    def __post_init__(self) -> None:
        if self.n_bins < 4:
            raise ValueError("n_bins: must be >= 4")

    @property
    def bin_headings(self) -> np.ndarray:
        """(n_bins, 2) unit heading of each bin center; bin 0 points along +x."""
        ang = 2.0 * math.pi * np.arange(self.n_bins) / self.n_bins
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)

    def bin_index(self, heading: np.ndarray) -> int:
        """Bin whose center is nearest to the heading direction."""
        ang = math.atan2(float(heading[1]), float(heading[0]))
        width = 2.0 * math.pi / self.n_bins
        return int(math.floor(ang / width + 0.5)) % self.n_bins


def project_node(
    position: np.ndarray,
    rotation: np.ndarray,
    translation: np.ndarray,
    intrinsics: tuple[float, float, float, float],
    image_shape: tuple[int, int],
    robot_xy: np.ndarray,
    d_score_max: float,
) -> tuple[int, int] | None:
    """Pixel of a ground node, or None when the projection is unusable.

    Valid means: in front of the camera, inside the image, and the node is
    within the scoring distance of the robot. The node is lifted to the
    ground plane (z = 0) before projection.
    """
    if float(np.hypot(*(np.asarray(position[:2]) - robot_xy))) >= d_score_max:
        return None
    p_world = np.array([position[0], position[1], 0.0])
    p_cam = rotation.T @ (p_world - translation)
    if p_cam[2] <= 0.0:
        return None
    fx, fy, cx, cy = intrinsics
    u = int(math.floor(fx * p_cam[0] / p_cam[2] + cx))
    v = int(math.floor(fy * p_cam[1] / p_cam[2] + cy))
    h, w = image_shape
    if 0 <= u < w and 0 <= v < h:
        return u, v
    return None


def goal_conf(pixel_heading: np.ndarray, bin_heading: np.ndarray) -> float:
    """Alignment factor in [0.5, 1]; opposite headings still score 0.5."""
    return (3.0 + float(np.dot(pixel_heading, bin_heading))) / 4.0


def r_conf(cost: float, image_shape: tuple[int, int]) -> float:
    """Reachability factor from an image-path cost; unreachable -> 0."""
    if math.isinf(cost):
        return 0.0
    h, w = image_shape
    return 1.0 - math.tanh(cost / (h + w))


def f_conf(f_value: float, tau_front: float) -> float:
    """Frontier confidence passthrough above the threshold, else 0."""
    return f_value if f_value > tau_front else 0.0


@dataclass
class PixelGraph:
    """4-connected image grid over traversable pixels, step cost at the
    destination pixel's weight w(p) = 1/(T_vis(p) + eps)."""

    traversable: np.ndarray  # (H, W) bool
    weights: np.ndarray  # (H, W) float64, finite positive on traversable pixels
    _csr: csr_matrix | None = field(default=None, repr=False)

    @classmethod
    def from_t_vis(cls, t_vis: np.ndarray, tau_trav: float, eps_pix: float) -> "PixelGraph":
        traversable = t_vis > tau_trav
        weights = 1.0 / (np.asarray(t_vis, dtype=np.float64) + eps_pix)
        return cls(traversable=traversable, weights=weights)

    def _matrix(self) -> csr_matrix:
        if self._csr is None:
            h, w = self.traversable.shape
            idx = np.arange(h * w).reshape(h, w)
            rows, cols, data = [], [], []
            for du, dv in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                src = self.traversable.copy()
                dst = np.roll(np.roll(self.traversable, -dv, axis=0), -du, axis=1)
                tgt_w = np.roll(np.roll(self.weights, -dv, axis=0), -du, axis=1)
                if du == 1:
                    src[:, -1] = False
                elif du == -1:
                    src[:, 0] = False
                if dv == 1:
                    src[-1, :] = False
                elif dv == -1:
                    src[0, :] = False
                ok = src & dst
                rows.append(idx[ok])
                cols.append((idx + dv * w + du)[ok])
                data.append(tgt_w[ok])
            self._csr = csr_matrix(
                (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                shape=(h * w, h * w),
            )
        return self._csr

    def snap_source(self, pixel: tuple[int, int], radius: float = 5.0) -> tuple[int, int] | None:
        """The pixel itself if traversable, else the nearest traversable
        pixel within the radius (ties: lowest row-major index)."""
        u, v = pixel
        if self.traversable[v, u]:
            return u, v
        vs, us = np.nonzero(self.traversable)
        if vs.size == 0:
            return None
        d = np.hypot(us - u, vs - v)
        best = np.lexsort((us, vs, d))[0]
        if d[best] <= radius:
            return int(us[best]), int(vs[best])
        return None

    def costs_from(self, pixel: tuple[int, int]) -> np.ndarray:
        """(H, W) minimum path cost from the pixel; inf where unreachable."""
        h, w = self.traversable.shape
        source = self.snap_source(pixel)
        if source is None:
            return np.full((h, w), np.inf)
        u, v = source
        dist = _csgraph_dijkstra(self._matrix(), directed=True, indices=v * w + u)
        return dist.reshape(h, w)


def mcip(
    t_vis: np.ndarray, source: tuple[int, int], tau_trav: float = 0.9, eps_pix: float = 0.05
) -> np.ndarray:
    """Minimum-cost image path distances from a source pixel to all pixels."""
    return PixelGraph.from_t_vis(t_vis, tau_trav, eps_pix).costs_from(source)


def _frame_bin_scores(
    frame: VisionFrame,
    pixel_graph: PixelGraph,
    node_pixel: tuple[int, int],
    ctx: ScoreContext,
) -> np.ndarray:
    """Per-bin max over traversable pixels of G_conf * R_conf * F_conf."""
    h, w = frame.image_shape
    costs = pixel_graph.costs_from(node_pixel)
    reach = np.where(np.isinf(costs), 0.0, 1.0 - np.tanh(costs / (h + w)))
    front = np.where(frame.f_vis > ctx.tau_front, frame.f_vis, 0.0)
    rf = np.where(pixel_graph.traversable, reach * front, 0.0)
    # pixel-ray ground headings depend only on the column, so the pixel max
    # factorizes into a per-column max followed by a per-bin column max
    col_best = rf.max(axis=0)
    azim = frame.column_azimuths()
    g = (3.0 + azim @ ctx.bin_headings.T) / 4.0  # (W, n_bins)
    return (g * col_best[:, None]).max(axis=0)


def score_graph(
    graph: NavGraph,
    frames: list[VisionFrame],
    robot_xy: np.ndarray,
    ctx: ScoreContext,
    prev_frontier_ids: set[int],
) -> None:
    """Write fresh score vectors and scoring distances onto frontier nodes.

    Nodes with no usable projection keep defaults when newly frontier and
    their previous vector otherwise; nodes already scored from closer by
    are left untouched.
    """
    pixel_graphs = [
        PixelGraph.from_t_vis(f.t_vis, ctx.tau_trav, ctx.eps_pix) for f in frames
    ]
    for node_id in graph.frontier_ids():
        node = graph.nodes[node_id]
        newly = node_id not in prev_frontier_ids
        d_robot = float(np.hypot(*(node.position - robot_xy)))
        pixels = [
            project_node(
                node.position,
                f.rotation,
                f.translation,
                f.intrinsics,
                f.image_shape,
                robot_xy,
                ctx.d_score_max,
            )
            for f in frames
        ]
        valid = [p is not None for p in pixels]
        if not any(valid):
            if newly:
                node.scores = np.full(ctx.n_bins, ctx.s_def)
                node.score_distance = math.inf
            continue
        if not (newly or d_robot < node.score_distance):
            continue
        best = np.zeros(ctx.n_bins)
        for frame, pg, pixel in zip(frames, pixel_graphs, pixels):
            if pixel is None:
                continue
            best = np.maximum(best, _frame_bin_scores(frame, pg, pixel, ctx))
        node.scores = best
        node.score_distance = d_robot
