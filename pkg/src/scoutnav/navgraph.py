"""Incremental sparse navigation graph built from local occupancy windows.

Nodes carry a free radius (clearance to the nearest obstacle or unknown
cell, capped), a monotone explored radius (how far around the node has
ever been observed), frontier points (unknown cells on the known/unknown
boundary assigned to the node) and a per-heading-bin score vector written
by the scoring stage. Edges are straight segments validated against the
current window with unknown treated as blocking; once added they persist
until an endpoint dies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt

from .sensors import FREE, OBSTACLE, UNKNOWN, TraversabilityGrid


@dataclass
class NavNode:
    id: int
    position: np.ndarray  # (2,) world meters
    r_f: float
    r_e: float
    frontier_points: list[tuple[float, float]] = field(default_factory=list)
    scores: np.ndarray = field(default_factory=lambda: np.zeros(0))
    score_distance: float = math.inf

    @property
    def is_frontier(self) -> bool:
        return bool(self.frontier_points)


class NavGraph:
    """Mutable node/edge store with insertion-ordered integer ids."""

    def __init__(self, n_bins: int = 16, s_def: float = 0.3):
        self.n_bins = n_bins
        self.s_def = s_def
        self.nodes: dict[int, NavNode] = {}
        self._adj: dict[int, dict[int, float]] = {}
        self._next_id = 0

    def add_node(self, position: np.ndarray, r_f: float, r_e: float) -> NavNode:
        node = NavNode(
            id=self._next_id,
            position=np.asarray(position, dtype=np.float64).copy(),
            r_f=float(r_f),
            r_e=float(r_e),
            scores=np.full(self.n_bins, self.s_def, dtype=np.float64),
        )
        self.nodes[node.id] = node
        self._adj[node.id] = {}
        self._next_id += 1
        return node

    def remove_node(self, node_id: int) -> None:
        for other in list(self._adj[node_id]):
            del self._adj[other][node_id]
        del self._adj[node_id]
        del self.nodes[node_id]

    def add_edge(self, i: int, j: int, length: float) -> None:
        if i == j:
            return
        self._adj[i][j] = length
        self._adj[j][i] = length

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj.get(i, {})

    def neighbors(self, i: int) -> dict[int, float]:
        return self._adj[i]

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for i in sorted(self._adj):
            for j, length in sorted(self._adj[i].items()):
                if i < j:
                    out.append((i, j, length))
        return out

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self._adj.values()) // 2

    def frontier_ids(self) -> list[int]:
        return [i for i in sorted(self.nodes) if self.nodes[i].is_frontier]

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def nearest_node(self, position: np.ndarray) -> NavNode | None:
        """Closest node to a point; ties break toward the lowest id."""
        best: NavNode | None = None
        best_d = math.inf
        for i in sorted(self.nodes):
            d = float(np.hypot(*(self.nodes[i].position - position)))
            if d < best_d:
                best, best_d = self.nodes[i], d
        return best


@dataclass
class SdfPair:
    """Distance fields (meters) to the nearest obstacle / unknown cell."""

    sdf_obs: np.ndarray
    sdf_unk: np.ndarray
    resolution: float
    origin: tuple[float, float]

    def at(self, position: np.ndarray) -> tuple[float, float] | None:
        """(obstacle, unknown) distances at the cell containing the point."""
        lx = int(math.floor((position[0] - self.origin[0]) / self.resolution))
        ly = int(math.floor((position[1] - self.origin[1]) / self.resolution))
        n = self.sdf_obs.shape[0]
        if 0 <= lx < n and 0 <= ly < n:
            return float(self.sdf_obs[ly, lx]), float(self.sdf_unk[ly, lx])
        return None


def _edt_to_class(cells: np.ndarray, cls: int, resolution: float) -> np.ndarray:
    mask = cells == cls
    if not mask.any():
        diag = math.hypot(*cells.shape) * resolution
        return np.full(cells.shape, diag, dtype=np.float64)
    # exact Euclidean distances in cell units, scaled once
    return distance_transform_edt(~mask) * resolution


def compute_sdf(grid: TraversabilityGrid) -> SdfPair:
    """Exact Euclidean distance transforms of the local window.

    Where a class is absent its field is capped at the grid diagonal so
    min() compositions stay finite.
    """
    return SdfPair(
        sdf_obs=_edt_to_class(grid.cells, OBSTACLE, grid.resolution),
        sdf_unk=_edt_to_class(grid.cells, UNKNOWN, grid.resolution),
        resolution=grid.resolution,
        origin=grid.origin,
    )


def update_nodes(graph: NavGraph, sdf: SdfPair, grid: TraversabilityGrid, r_f_max: float) -> None:
    """Refresh node radii from the current window; drop nodes on obstacles.

    Nodes outside the window, or on cells currently occluded (unknown),
    keep their state: no new observation reached them this tick.
    """
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        cell = grid.local_cell(node.position[0], node.position[1])
        if cell is None or grid.cells[cell] == UNKNOWN:
            continue
        d = sdf.at(node.position)
        assert d is not None
        node.r_f = min(d[0], d[1], r_f_max)
        node.r_e = max(node.r_e, d[1])
        if node.r_f == 0.0:
            graph.remove_node(node_id)


def sample_new_nodes(
    grid: TraversabilityGrid,
    graph: NavGraph,
    sdf: SdfPair,
    n_samples: int,
    r_trav: float,
    r_f_max: float,
    rng: np.random.Generator,
) -> list[NavNode]:
    """Sample candidate nodes uniformly over free cells and keep the sparse ones.

    A candidate needs clearance above r_trav to both obstacle and unknown
    cells and must lie outside the free radius of every node, including
    nodes accepted earlier in this call (each kept node claims its
    clearance disc).
    """
    free_rows, free_cols = np.nonzero(grid.cells == FREE)
    if free_rows.size == 0:
        return []
    picks = rng.integers(0, free_rows.size, size=n_samples)
    offsets = rng.random((n_samples, 2))
    xs = grid.origin[0] + (free_cols[picks] + offsets[:, 0]) * grid.resolution
    ys = grid.origin[1] + (free_rows[picks] + offsets[:, 1]) * grid.resolution
    clearance = np.minimum(
        sdf.sdf_obs[free_rows[picks], free_cols[picks]],
        sdf.sdf_unk[free_rows[picks], free_cols[picks]],
    )
    ok = clearance > r_trav

    existing_pos = np.array([graph.nodes[i].position for i in sorted(graph.nodes)])
    existing_rf = np.array([graph.nodes[i].r_f for i in sorted(graph.nodes)])
    if existing_pos.size:
        d = np.hypot(xs[:, None] - existing_pos[None, :, 0], ys[:, None] - existing_pos[None, :, 1])
        ok &= (d > existing_rf[None, :]).all(axis=1)

    accepted: list[NavNode] = []
    for k in np.flatnonzero(ok):
        pos = np.array([xs[k], ys[k]])
        rej = False
        for node in accepted:
            if np.hypot(*(pos - node.position)) <= node.r_f:
                rej = True
                break
        if rej:
            continue
        d = sdf.at(pos)
        assert d is not None
        accepted.append(graph.add_node(pos, r_f=min(d[0], d[1], r_f_max), r_e=d[1]))
    return accepted


def _boundary_cells(grid: TraversabilityGrid) -> np.ndarray:
    """(n, 2) row/col of unknown cells 4-adjacent to a free cell."""
    unk = grid.cells == UNKNOWN
    free = grid.cells == FREE
    near_free = np.zeros_like(free)
    near_free[1:, :] |= free[:-1, :]
    near_free[:-1, :] |= free[1:, :]
    near_free[:, 1:] |= free[:, :-1]
    near_free[:, :-1] |= free[:, 1:]
    return np.argwhere(unk & near_free)


def update_frontier_nodes(grid: TraversabilityGrid, graph: NavGraph) -> None:
    """Maintain frontier points: cleanup, status refresh, new assignments.

    Frontier points that became known (and are inside the window) are
    dropped. Each current boundary cell not already inside some node's
    explored radius is assigned to its nearest node with a collision-free
    segment to the cell; unreachable cells are skipped.
    """
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        if not node.frontier_points:
            continue
        kept = []
        for p in node.frontier_points:
            cell = grid.local_cell(p[0], p[1])
            if cell is not None and grid.cells[cell] != UNKNOWN:
                continue
            kept.append(p)
        node.frontier_points = kept

    cells = _boundary_cells(grid)
    if cells.size == 0:
        return
    ids = sorted(graph.nodes)
    if not ids:
        return
    pos = np.array([graph.nodes[i].position for i in ids])
    r_e = np.array([graph.nodes[i].r_e for i in ids])
    centers = np.stack(
        [
            grid.origin[0] + (cells[:, 1] + 0.5) * grid.resolution,
            grid.origin[1] + (cells[:, 0] + 0.5) * grid.resolution,
        ],
        axis=1,
    )
    dist = np.hypot(centers[:, None, 0] - pos[None, :, 0], centers[:, None, 1] - pos[None, :, 1])
    covered = (dist <= r_e[None, :]).any(axis=1)

    in_window = np.array(
        [grid.local_cell(p[0], p[1]) is not None for p in pos]
    )
    for k in np.flatnonzero(~covered):
        center = centers[k]
        order = np.argsort(dist[k], kind="stable")
        for j in order:
            if not in_window[j]:
                continue
            node = graph.nodes[ids[j]]
            if not grid.segment_blocked(node.position, center, block_unknown=True, skip_last=True):
                node.frontier_points.append((float(center[0]), float(center[1])))
                break


def build_edges(graph: NavGraph, grid: TraversabilityGrid, r_edge: float) -> list[tuple[int, int]]:
    """Connect node pairs within r_edge by collision-free straight segments.

    Only pairs that can be verified against the current window are
    considered; unknown cells block. Existing edges are kept as they are.
    """
    ids = [
        i
        for i in sorted(graph.nodes)
        if grid.local_cell(*graph.nodes[i].position) is not None
    ]
    added = []
    for a_idx, i in enumerate(ids):
        pi = graph.nodes[i].position
        for j in ids[a_idx + 1 :]:
            if graph.has_edge(i, j):
                continue
            pj = graph.nodes[j].position
            d = float(np.hypot(*(pi - pj)))
            if d > r_edge:
                continue
            if not grid.segment_blocked(pi, pj, block_unknown=True, skip_last=False):
                graph.add_edge(i, j, d)
                added.append((i, j))
    return added


def update_navigation_graph(
    graph: NavGraph,
    grid: TraversabilityGrid,
    n_samples: int,
    r_trav: float,
    r_f_max: float,
    r_edge: float,
    rng: np.random.Generator,
) -> NavGraph:
    """One full graph update from the current local window."""
    sdf = compute_sdf(grid)
    update_nodes(graph, sdf, grid, r_f_max)
    sample_new_nodes(grid, graph, sdf, n_samples, r_trav, r_f_max, rng)
    update_frontier_nodes(grid, graph)
    build_edges(graph, grid, r_edge)
    return graph
