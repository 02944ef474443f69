"""High-level planning over the scored graph and the kinematic stepper.

Planning adds a virtual goal vertex connected to every frontier node by an
edge costed z(score) * safe-distance, where the safe distance routes
around already-explored space on a coarse grid so the heuristic never
under-approximates, then runs Dijkstra from the node nearest the robot.
A local goal is picked a fixed arc length along the resulting polyline.
The stepper advances the robot at constant speed along a grid path over
ground-truth free cells inside the current sensing window.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .navgraph import NavGraph
from .world import OBSTACLE, WorldGrid

_SQRT2 = math.sqrt(2.0)


def z_scale(score: float, alpha: float = 20.0, eps: float = 1e-6) -> float:
    """Score-to-cost scaling 1 - alpha * ln(score + eps); decreasing in score."""
    return 1.0 - alpha * math.log(score + eps)


@dataclass
class CoarseGrid:
    """Coarse explored/unexplored occupancy covering the graph and the goal."""

    resolution: float
    origin: tuple[float, float]
    explored: np.ndarray  # (rows, cols) bool

    @property
    def shape(self) -> tuple[int, int]:
        return self.explored.shape

    def cell_of(self, position: np.ndarray) -> tuple[int, int]:
        col = int(math.floor((position[0] - self.origin[0]) / self.resolution))
        row = int(math.floor((position[1] - self.origin[1]) / self.resolution))
        rows, cols = self.explored.shape
        return min(max(row, 0), rows - 1), min(max(col, 0), cols - 1)

    @property
    def perimeter(self) -> float:
        rows, cols = self.explored.shape
        return 2.0 * (rows + cols) * self.resolution


def build_coarse_grid(
    graph: NavGraph, goal: np.ndarray, resolution: float = 2.0, margin: float = 4.0
) -> CoarseGrid:
    """Mark every coarse cell touched by some node's explored-radius disc."""
    pts = [np.asarray(goal, dtype=np.float64)]
    radii = [0.0]
    for i in sorted(graph.nodes):
        pts.append(graph.nodes[i].position)
        radii.append(graph.nodes[i].r_e)
    pts_arr = np.array(pts)
    rad_arr = np.array(radii)
    lo = (pts_arr - rad_arr[:, None]).min(axis=0) - margin
    hi = (pts_arr + rad_arr[:, None]).max(axis=0) + margin
    cols = max(1, int(math.ceil((hi[0] - lo[0]) / resolution)))
    rows = max(1, int(math.ceil((hi[1] - lo[1]) / resolution)))
    explored = np.zeros((rows, cols), dtype=bool)
    cx = lo[0] + (np.arange(cols) + 0.5) * resolution
    cy = lo[1] + (np.arange(rows) + 0.5) * resolution
    half = resolution / 2.0
    for i in sorted(graph.nodes):
        node = graph.nodes[i]
        if node.r_e <= 0.0:
            continue
        # distance from disc center to each cell square, vectorized per node
        dx = np.maximum(np.abs(cx - node.position[0]) - half, 0.0)
        dy = np.maximum(np.abs(cy - node.position[1]) - half, 0.0)
        explored |= (dx[None, :] ** 2 + dy[:, None] ** 2) <= node.r_e**2
    return CoarseGrid(resolution=resolution, origin=(float(lo[0]), float(lo[1])), explored=explored)


def safe_distance(node_position: np.ndarray, goal: np.ndarray, coarse: CoarseGrid) -> float:
    """Length of the shortest 8-connected unexplored-cell path to the goal.

    The start and goal cells are passable regardless of their explored
    state. The result is floored at the Euclidean distance; when no
    unexplored route exists a large finite penalty (10x the grid
    perimeter) applies instead.
    """
    euclid = float(np.hypot(*(np.asarray(node_position[:2]) - np.asarray(goal[:2]))))
    start = coarse.cell_of(np.asarray(node_position))
    end = coarse.cell_of(np.asarray(goal))
    rows, cols = coarse.shape
    if start == end:
        return euclid
    dist = np.full((rows, cols), np.inf)
    dist[start] = 0.0
    heap = [(0.0, start)]
    while heap:
        d, (r, c) = heapq.heappop(heap)
        if (r, c) == end:
            return max(d, euclid)
        if d > dist[r, c]:
            continue
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                nr, nc = r + dr, c + dc
                if not (0 <= nr < rows and 0 <= nc < cols):
                    continue
                if coarse.explored[nr, nc] and (nr, nc) != end:
                    continue
                step = coarse.resolution * (_SQRT2 if dr and dc else 1.0)
                nd = d + step
                if nd < dist[nr, nc]:
                    dist[nr, nc] = nd
                    heapq.heappush(heap, (nd, (nr, nc)))
    return max(10.0 * coarse.perimeter, euclid)


@dataclass
class PlanResult:
    """A high-level plan: graph node path, costs, exit frontier, local goal."""

    node_path: list[int]
    points: list[np.ndarray]  # node positions plus the goal position
    total_cost: float
    exit_frontier: int | None
    exit_bin: int | None
    aux_cost: float
    g_local: np.ndarray
    direct: bool


def _graph_dijkstra(
    graph: NavGraph, start: int, aux_edges: dict[int, float], goal_key: int
) -> tuple[list[int], float] | None:
    """Dijkstra from start to a virtual goal vertex reachable via aux edges."""
    dist: dict[int, float] = {start: 0.0}
    prev: dict[int, int] = {}
    heap: list[tuple[float, int]] = [(0.0, start)]
    visited: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in visited:
            continue
        visited.add(u)
        if u == goal_key:
            path = [u]
            while path[-1] != start:
                path.append(prev[path[-1]])
            return path[::-1], d
        neighbors = dict(graph.neighbors(u)) if u != goal_key else {}
        if u in aux_edges:
            neighbors[goal_key] = aux_edges[u]
        for v, length in sorted(neighbors.items()):
            nd = d + length
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    return None


def _local_goal(points: list[np.ndarray], d_local: float) -> np.ndarray:
    """Point at arc distance d_local along the polyline (or its end)."""
    remaining = d_local
    for a, b in zip(points, points[1:]):
        seg = float(np.hypot(*(b - a)))
        if seg >= remaining and seg > 0.0:
            return a + (b - a) * (remaining / seg)
        remaining -= seg
    return points[-1].copy()


def plan(
    graph: NavGraph,
    robot_xy: np.ndarray,
    goal: np.ndarray,
    bin_index_fn,
    d_local: float = 5.0,
    alpha: float = 20.0,
    eps_z: float = 1e-6,
    coarse_resolution: float = 2.0,
    z_fn=None,
) -> PlanResult | None:
    """Plan from the node nearest the robot to the active goal.

    Goals inside observed free space (within some node's free radius) are
    reached directly through the graph; otherwise the search exits through
    a frontier node whose auxiliary edge to the goal costs
    z(score at the goal-heading bin) * safe-distance. Returns None when no
    plan exists (no frontier and the goal is not in known free space).
    """
    if not graph.nodes:
        return None
    robot_xy = np.asarray(robot_xy, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    if z_fn is None:
        z_fn = lambda s: z_scale(s, alpha, eps_z)
    start = graph.nearest_node(robot_xy).id
    goal_key = -1

    goal_known_free = any(
        np.hypot(*(graph.nodes[i].position - goal)) < graph.nodes[i].r_f
        for i in sorted(graph.nodes)
    )
    if goal_known_free:
        end = graph.nearest_node(goal).id
        if end == start:
            node_path, cost = [start], 0.0
        else:
            found = _graph_dijkstra(graph, start, {end: 0.0}, goal_key)
            if found is None:
                return None
            node_path = found[0][:-1]
            cost = found[1]
        points = [graph.nodes[i].position.copy() for i in node_path] + [goal.copy()]
        cost += float(np.hypot(*(points[-1] - points[-2])))
        return PlanResult(
            node_path=node_path,
            points=points,
            total_cost=cost,
            exit_frontier=None,
            exit_bin=None,
            aux_cost=0.0,
            g_local=_local_goal(points, d_local),
            direct=True,
        )

    frontier_ids = graph.frontier_ids()
    if not frontier_ids:
        return None
    coarse = build_coarse_grid(graph, goal, coarse_resolution)
    aux_edges: dict[int, float] = {}
    aux_bins: dict[int, int] = {}
    for i in frontier_ids:
        node = graph.nodes[i]
        offset = goal - node.position
        norm = float(np.hypot(*offset))
        heading = offset / norm if norm > 0.0 else np.array([1.0, 0.0])
        j = bin_index_fn(heading)
        d_safe = safe_distance(node.position, goal, coarse)
        aux_edges[i] = z_fn(float(node.scores[j])) * d_safe
        aux_bins[i] = j
    found = _graph_dijkstra(graph, start, aux_edges, goal_key)
    if found is None:
        return None
    path, cost = found
    node_path = path[:-1]
    exit_node = node_path[-1]
    points = [graph.nodes[i].position.copy() for i in node_path] + [goal.copy()]
    return PlanResult(
        node_path=node_path,
        points=points,
        total_cost=cost,
        exit_frontier=exit_node,
        exit_bin=aux_bins[exit_node],
        aux_cost=aux_edges[exit_node],
        g_local=_local_goal(points, d_local),
        direct=False,
    )


def _astar_window(
    world: WorldGrid, start_cell: tuple[int, int], goal_cell: tuple[int, int], window: tuple[int, int, int, int]
) -> list[tuple[int, int]] | None:
    """8-connected A* over non-obstacle ground-truth cells inside a window.

    Diagonal moves require both orthogonal neighbors to be passable so the
    path never cuts an obstacle corner.
    """
    x_lo, y_lo, x_hi, y_hi = window

    def passable(ix: int, iy: int) -> bool:
        if not (x_lo <= ix <= x_hi and y_lo <= iy <= y_hi):
            return False
        if not (0 <= ix < world.width and 0 <= iy < world.height):
            return False
        return world.cells[iy, ix] != OBSTACLE

    if not passable(*start_cell) or not passable(*goal_cell):
        return None
    g_cost = {start_cell: 0.0}
    prev: dict[tuple[int, int], tuple[int, int]] = {}
    h0 = math.hypot(goal_cell[0] - start_cell[0], goal_cell[1] - start_cell[1])
    heap = [(h0, 0.0, start_cell)]
    closed: set[tuple[int, int]] = set()
    while heap:
        _, g, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        closed.add(cell)
        if cell == goal_cell:
            path = [cell]
            while path[-1] != start_cell:
                path.append(prev[path[-1]])
            return path[::-1]
        ix, iy = cell
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nxt = (ix + dx, iy + dy)
                if not passable(*nxt):
                    continue
                if dx and dy and not (passable(ix + dx, iy) and passable(ix, iy + dy)):
                    continue
                step = _SQRT2 if dx and dy else 1.0
                ng = g + step
                if ng < g_cost.get(nxt, math.inf):
                    g_cost[nxt] = ng
                    prev[nxt] = cell
                    h = math.hypot(goal_cell[0] - nxt[0], goal_cell[1] - nxt[1])
                    heapq.heappush(heap, (ng + h, ng, nxt))
    return None


def step_robot(
    world: WorldGrid,
    pose: np.ndarray,
    g_local: np.ndarray,
    speed: float,
    r_max: float,
) -> tuple[np.ndarray, bool]:
    """Advance the robot one tick toward the local goal.

    Follows an 8-connected grid path over ground-truth non-obstacle cells
    within the current sensing window; hazard terrain is geometrically
    flat and does not stop the stepper. Returns (new pose, blocked flag);
    a blocked step leaves the pose unchanged.
    """
    res = world.resolution
    pose = np.asarray(pose, dtype=np.float64)
    target = np.asarray(g_local, dtype=np.float64).copy()
    if float(np.hypot(*(target - pose[:2]))) < 1e-9:
        return pose.copy(), False
    cix, ciy = world.cell_index(pose[0], pose[1])
    half = int(math.ceil(r_max / res))
    window = (cix - half, ciy - half, cix + half, ciy + half)
    # clamp the target into the window box
    target[0] = min(max(target[0], (window[0] + 0.5) * res), (window[2] + 0.5) * res)
    target[1] = min(max(target[1], (window[1] + 0.5) * res), (window[3] + 0.5) * res)
    goal_cell = world.cell_index(target[0], target[1])
    goal_cell = _nearest_passable(world, goal_cell, window, radius_cells=int(1.0 / res) + 1)
    if goal_cell is None:
        return pose.copy(), True
    path = _astar_window(world, (cix, ciy), goal_cell, window)
    if path is None or len(path) < 2:
        if path is not None and goal_cell == (cix, ciy):
            return pose.copy(), False
        return pose.copy(), True

    waypoints = [pose[:2]] + [np.array(world.cell_center(ix, iy)) for ix, iy in path[1:]]
    remaining = speed
    position = pose[:2].copy()
    heading = pose[2]
    for a, b in zip(waypoints, waypoints[1:]):
        seg = float(np.hypot(*(b - a)))
        if seg <= 0.0:
            continue
        if seg >= remaining:
            direction = (b - a) / seg
            position = a + direction * remaining
            heading = math.atan2(direction[1], direction[0])
            remaining = 0.0
            break
        position = b
        heading = math.atan2(b[1] - a[1], b[0] - a[0])
        remaining -= seg
    return np.array([position[0], position[1], heading]), False


def _nearest_passable(
    world: WorldGrid, cell: tuple[int, int], window: tuple[int, int, int, int], radius_cells: int
) -> tuple[int, int] | None:
    """The cell itself, or the nearest non-obstacle in-bounds cell close by."""
    x_lo, y_lo, x_hi, y_hi = window

    def ok(ix: int, iy: int) -> bool:
        return (
            x_lo <= ix <= x_hi
            and y_lo <= iy <= y_hi
            and 0 <= ix < world.width
            and 0 <= iy < world.height
            and world.cells[iy, ix] != OBSTACLE
        )

    if ok(*cell):
        return cell
    best = None
    best_d = math.inf
    for dy in range(-radius_cells, radius_cells + 1):
        for dx in range(-radius_cells, radius_cells + 1):
            ix, iy = cell[0] + dx, cell[1] + dy
            if not ok(ix, iy):
                continue
            d = math.hypot(dx, dy)
            if d < best_d:
                best, best_d = (ix, iy), d
    return best
