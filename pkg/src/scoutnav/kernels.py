"""Compiled ray-casting primitives shared by the simulated sensors.

All kernels operate on uint8 terrain/occupancy grids. Terrain values follow
`world` (0 ground, 1 obstacle, 2 hazard); local occupancy values follow
`sensors` (0 free, 1 obstacle, 2 unknown). Cells outside an array are
treated as obstacle walls.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _sight_blocked(world: np.ndarray, x0: int, y0: int, x1: int, y1: int) -> bool:
    """True if any cell strictly between (x0,y0) and (x1,y1) blocks sight."""
    h, w = world.shape
    dx = abs(x1 - x0)
    sx = 1 if x0 < x1 else -1
    dy = -abs(y1 - y0)
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        if x == x1 and y == y1:
            return False
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
        if x == x1 and y == y1:
            return False
        if x < 0 or y < 0 or x >= w or y >= h:
            return True
        if world[y, x] == 1:
            return True


@njit(cache=True)
def los_window(world: np.ndarray, cix: int, ciy: int, half: int, r_max_cells: float) -> np.ndarray:
    """Line-of-sight occupancy window centered on cell (cix, ciy).

    Cells farther than r_max_cells (cell units) or without sight from the
    center stay unknown; visible cells classify as free (ground/hazard) or
    obstacle. Out-of-world cells classify as obstacle when visible.
    """
    h, w = world.shape
    n = 2 * half + 1
    out = np.full((n, n), 2, dtype=np.uint8)
    r2 = r_max_cells * r_max_cells
    for ly in range(n):
        dy = ly - half
        for lx in range(n):
            dx = lx - half
            if dx * dx + dy * dy > r2:
                continue
            ix = cix + dx
            iy = ciy + dy
            if ix < 0 or iy < 0 or ix >= w or iy >= h:
                cls = np.uint8(1)
            elif world[iy, ix] == 1:
                cls = np.uint8(1)
            else:
                cls = np.uint8(0)
            if dx == 0 and dy == 0:
                out[ly, lx] = cls
                continue
            if not _sight_blocked(world, cix, ciy, ix, iy):
                out[ly, lx] = cls
    return out


@njit(cache=True)
def segment_blocked(
    cells: np.ndarray,
    ox: float,
    oy: float,
    res: float,
    x0: float,
    y0: float,
    x1: float,
    y1: float,
    block_unknown: bool,
    skip_last: bool,
) -> bool:
    """True if the segment crosses a blocking cell of a local occupancy grid.

    Visits every cell the segment passes through (conservative at exact
    corner crossings). Blocking: obstacle, unknown when `block_unknown`,
    and anything outside the grid.
    """
    n_rows, n_cols = cells.shape
    u0 = (x0 - ox) / res
    v0 = (y0 - oy) / res
    u1 = (x1 - ox) / res
    v1 = (y1 - oy) / res
    ix = int(np.floor(u0))
    iy = int(np.floor(v0))
    jx = int(np.floor(u1))
    jy = int(np.floor(v1))
    dx = u1 - u0
    dy = v1 - v0
    step_x = 1 if dx > 0 else (-1 if dx < 0 else 0)
    step_y = 1 if dy > 0 else (-1 if dy < 0 else 0)
    inv_dx = 1e30 if dx == 0 else abs(1.0 / dx)
    inv_dy = 1e30 if dy == 0 else abs(1.0 / dy)
    if step_x > 0:
        t_max_x = (ix + 1 - u0) * inv_dx
    elif step_x < 0:
        t_max_x = (u0 - ix) * inv_dx
    else:
        t_max_x = 1e30
    if step_y > 0:
        t_max_y = (iy + 1 - v0) * inv_dy
    elif step_y < 0:
        t_max_y = (v0 - iy) * inv_dy
    else:
        t_max_y = 1e30
    max_steps = 2 * (n_rows + n_cols + 4)
    for _ in range(max_steps):
        at_end = ix == jx and iy == jy
        if not (at_end and skip_last):
            if ix < 0 or iy < 0 or ix >= n_cols or iy >= n_rows:
                return True
            c = cells[iy, ix]
            if c == 1 or (block_unknown and c == 2):
                return True
        if at_end:
            return False
        if t_max_x < t_max_y:
            t_max_x += inv_dx
            ix += step_x
        elif t_max_y < t_max_x:
            t_max_y += inv_dy
            iy += step_y
        else:
            t_max_x += inv_dx
            ix += step_x
            t_max_y += inv_dy
            iy += step_y
    return True  # fp corner pathology: fail safe


@njit(cache=True)
def cast_columns(
    world: np.ndarray,
    res: float,
    px: float,
    py: float,
    dir_x: np.ndarray,
    dir_y: np.ndarray,
    tgt_x: np.ndarray,
    tgt_y: np.ndarray,
    tgt_r: np.ndarray,
    h_v: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cast one ground ray per image column against obstacles and targets.

    Returns per column: termination arc distance, termination reason
    (0 horizon, 1 obstacle/world edge, 2 target) and the hit target index
    (-1 when none). Ties resolve target < obstacle < horizon.
    """
    grid_h, grid_w = world.shape
    n = dir_x.shape[0]
    s_end = np.empty(n, dtype=np.float64)
    reason = np.empty(n, dtype=np.int8)
    hit = np.full(n, -1, dtype=np.int64)
    for c in range(n):
        dx = dir_x[c]
        dy = dir_y[c]
        s_tgt = 1e30
        t_idx = -1
        for k in range(tgt_x.shape[0]):
            ox = tgt_x[k] - px
            oy = tgt_y[k] - py
            proj = ox * dx + oy * dy
            d2 = ox * ox + oy * oy - proj * proj
            r2 = tgt_r[k] * tgt_r[k]
            if d2 <= r2:
                root = np.sqrt(r2 - d2)
                s0 = proj - root
                if s0 < 0.0:
                    if proj + root > 0.0:
                        s0 = 0.0  # camera inside the cylinder footprint
                    else:
                        continue
                if s0 < s_tgt:
                    s_tgt = s0
                    t_idx = k
        limit = h_v if h_v < s_tgt else s_tgt
        u = px / res
        v = py / res
        ix = int(np.floor(u))
        iy = int(np.floor(v))
        step_x = 1 if dx > 0 else (-1 if dx < 0 else 0)
        step_y = 1 if dy > 0 else (-1 if dy < 0 else 0)
        inv_dx = 1e30 if dx == 0 else abs(1.0 / dx)
        inv_dy = 1e30 if dy == 0 else abs(1.0 / dy)
        if step_x > 0:
            t_max_x = (ix + 1 - u) * res * inv_dx
        elif step_x < 0:
            t_max_x = (u - ix) * res * inv_dx
        else:
            t_max_x = 1e30
        if step_y > 0:
            t_max_y = (iy + 1 - v) * res * inv_dy
        elif step_y < 0:
            t_max_y = (v - iy) * res * inv_dy
        else:
            t_max_y = 1e30
        t_dx = res * inv_dx
        t_dy = res * inv_dy
        s_obs = 1e30
        while True:
            if t_max_x < t_max_y:
                t_enter = t_max_x
                t_max_x += t_dx
                ix += step_x
            else:
                t_enter = t_max_y
                t_max_y += t_dy
                iy += step_y
            if t_enter > limit:
                break
            if ix < 0 or iy < 0 or ix >= grid_w or iy >= grid_h:
                s_obs = t_enter
                break
            if world[iy, ix] == 1:
                s_obs = t_enter
                break
        if s_tgt <= s_obs and s_tgt <= h_v:
            s_end[c] = s_tgt
            reason[c] = 2
            hit[c] = t_idx
        elif s_obs <= h_v:
            s_end[c] = s_obs
            reason[c] = 1
        else:
            s_end[c] = h_v
            reason[c] = 0
    return s_end, reason, hit


@njit(cache=True)
def ray_interval_all_ground(
    world: np.ndarray,
    res: float,
    px: float,
    py: float,
    dx: float,
    dy: float,
    s0: float,
    s1: float,
    step: float,
) -> bool:
    """True if every sampled point of the ray in (s0, s1] is in-bounds ground."""
    h, w = world.shape
    s = s0 + step
    while s <= s1:
        x = px + s * dx
        y = py + s * dy
        ix = int(np.floor(x / res))
        iy = int(np.floor(y / res))
        if ix < 0 or iy < 0 or ix >= w or iy >= h:
            return False
        if world[iy, ix] != 0:
            return False
        s += step
    return True
