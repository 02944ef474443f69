"""Built-in scenario library: desk-scale analogs of the evaluation worlds.

* corridor      — two circular fences with a narrow corridor between them;
                  the straight line to the goal is blocked by a fence.
* dead_end      — a walled band with two openings; the aligned opening leads
                  into a looped pocket that makes no progress toward the
                  goal, the far opening leads the long way around.
* buildings     — a cluster of rectangular buildings with the goal behind
                  them, reachable through an alley.
* object_search — an open field with a distant tall target and an offset
                  prior goal; the query must be localized by vision.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .world import GROUND, HAZARD, OBSTACLE, Scenario, TargetObject, WorldGrid, save_scenario


def _blank(width_m: float, height_m: float, res: float) -> np.ndarray:
    return np.full((int(round(height_m / res)), int(round(width_m / res))), GROUND, dtype=np.uint8)


def _fill_rect(cells: np.ndarray, res: float, x0: float, y0: float, x1: float, y1: float, value: int = OBSTACLE) -> None:
    h, w = cells.shape
    ix0 = max(0, int(math.floor(x0 / res)))
    iy0 = max(0, int(math.floor(y0 / res)))
    ix1 = min(w, int(math.ceil(x1 / res)))
    iy1 = min(h, int(math.ceil(y1 / res)))
    cells[iy0:iy1, ix0:ix1] = value


def _ring(cells: np.ndarray, res: float, cx: float, cy: float, radius: float, thickness: float) -> None:
    h, w = cells.shape
    ys = (np.arange(h) + 0.5) * res
    xs = (np.arange(w) + 0.5) * res
    d = np.hypot(xs[None, :] - cx, ys[:, None] - cy)
    cells[(d >= radius - thickness) & (d <= radius)] = OBSTACLE


def _border(cells: np.ndarray, res: float, thickness: float) -> None:
    n = max(1, int(round(thickness / res)))
    cells[:n, :] = OBSTACLE
    cells[-n:, :] = OBSTACLE
    cells[:, :n] = OBSTACLE
    cells[:, -n:] = OBSTACLE


def corridor(res: float = 0.1, seed: int = 0) -> Scenario:
    """Two circular fences; the corridor between them is the short way."""
    cells = _blank(70.0, 50.0, res)
    _ring(cells, res, 33.0, 32.5, 12.0, 0.3)
    _ring(cells, res, 33.0, 5.5, 12.0, 0.3)
    world = WorldGrid(resolution=res, cells=cells)
    return Scenario(
        world=world,
        start=(8.0, 28.0, 0.0),
        goal=(58.0, 28.0),
        budget=160,
        seed=seed,
        name="corridor",
    )


def dead_end(res: float = 0.1, seed: int = 0) -> Scenario:
    """Band wall with a looped pocket behind the aligned opening.

    The pocket is a ring corridor around an island; both of its mouths
    open back through the band, so entering it makes no progress toward
    the goal. The opening far to the east is the only productive route.
    """
    cells = _blank(60.0, 40.0, res)
    _border(cells, res, 0.3)
    # band across the world, openings at the pocket mouths and the east route
    _fill_rect(cells, res, 0.3, 23.6, 24.4, 24.0)
    _fill_rect(cells, res, 27.0, 23.6, 31.0, 24.0)
    _fill_rect(cells, res, 33.6, 23.6, 46.0, 24.0)
    _fill_rect(cells, res, 49.0, 23.6, 59.7, 24.0)
    # pocket: outer shell (x 24..34, y 13..24) with mouths at the band
    _fill_rect(cells, res, 23.6, 12.6, 34.4, 13.0)  # top
    _fill_rect(cells, res, 23.6, 13.0, 24.0, 24.0)  # west
    _fill_rect(cells, res, 34.0, 13.0, 34.4, 24.0)  # east
    # pocket island: leaves a 3 m ring corridor
    _fill_rect(cells, res, 27.0, 16.0, 31.0, 21.0)
    world = WorldGrid(resolution=res, cells=cells)
    return Scenario(
        world=world,
        start=(30.0, 34.0, -math.pi / 2.0),
        goal=(14.0, 6.0),
        budget=250,
        seed=seed,
        name="dead_end",
    )


def buildings(res: float = 0.1, seed: int = 0) -> Scenario:
    """Building cluster with the goal behind it; an alley is the way in."""
    cells = _blank(70.0, 45.0, res)
    _border(cells, res, 0.3)
    _fill_rect(cells, res, 30.0, 12.0, 40.0, 24.5)  # blocks the straight road
    _fill_rect(cells, res, 30.0, 27.5, 40.0, 40.0)  # alley south wall
    _fill_rect(cells, res, 46.0, 6.0, 56.0, 17.0)
    _fill_rect(cells, res, 12.0, 33.0, 22.0, 41.0)
    cells_world = WorldGrid(resolution=res, cells=cells)
    return Scenario(
        world=cells_world,
        start=(8.0, 22.0, 0.0),
        goal=(52.0, 26.0),
        budget=200,
        seed=seed,
        name="buildings",
    )


def object_search(res: float = 0.1, seed: int = 0) -> Scenario:
    """Open field, tall query object 50 m out, prior goal offset from it."""
    cells = _blank(80.0, 60.0, res)
    _fill_rect(cells, res, 34.0, 24.0, 38.0, 26.0)  # low wall the robot skirts
    _fill_rect(cells, res, 30.0, 44.0, 44.0, 46.0, HAZARD)  # pond
    world = WorldGrid(
        resolution=res,
        cells=cells,
        targets=[
            TargetObject(label="water_tank", position=(60.05, 30.05), height=4.0, footprint_radius=0.3)
        ],
    )
    return Scenario(
        world=world,
        start=(10.0, 30.0, 0.0),
        goal=(55.0, 40.0),
        query="water_tank",
        budget=140,
        seed=seed,
        name="object_search",
    )


BUILDERS = {
    "corridor": corridor,
    "dead_end": dead_end,
    "buildings": buildings,
    "object_search": object_search,
}

# region of the dead_end pocket, for revisit-cycle detection
DEAD_END_POCKET = (23.6, 12.6, 34.4, 24.0)


def build(name: str, res: float = 0.1, seed: int = 0) -> Scenario:
    if name not in BUILDERS:
        raise KeyError(f"unknown scenario '{name}' (have: {sorted(BUILDERS)})")
    return BUILDERS[name](res=res, seed=seed)


def write_library(out_dir: str | Path, res: float = 0.1) -> list[Path]:
    """Write every built-in scenario as a file; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, builder in BUILDERS.items():
        path = out / f"{name}.scen"
        save_scenario(builder(res=res), path)
        paths.append(path)
    return paths
