"""Ground-truth world model and plain-text scenario files.

A world is a 2D grid of terrain cells plus a set of cylindrical target
objects. Obstacle cells block both motion and sight. Hazard cells are
geometrically flat (a depth sensor reports them as free ground) but are
visually unsafe terrain; only the vision model can tell them apart from
ground. Anything outside the grid behaves like an obstacle wall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

GROUND = 0
OBSTACLE = 1
HAZARD = 2

_CHAR_TO_CLASS = {".": GROUND, "#": OBSTACLE, "~": HAZARD}
_CLASS_TO_CHAR = {v: k for k, v in _CHAR_TO_CLASS.items()}

_HEADER_KEYS = ("resolution", "start", "goal", "query", "budget", "seed")


class ScenarioError(ValueError):
    """Malformed scenario file or violated scenario invariant."""


@dataclass(frozen=True)
class TargetObject:
    """Cylindrical queryable object: label, world position, vertical extent."""

    label: str
    position: tuple[float, float]
    height: float
    footprint_radius: float


@dataclass
class WorldGrid:
    """Static environment grid. Immutable after construction by convention."""

    resolution: float
    cells: np.ndarray  # (height, width) uint8 of terrain classes
    targets: list[TargetObject] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if self.resolution <= 0:
            raise ScenarioError("resolution: must be > 0")
        if self.cells.ndim != 2 or self.cells.size == 0:
            raise ScenarioError("grid: width and height must be > 0")
        for t in self.targets:
            if not self.in_bounds(*t.position):
                raise ScenarioError(f"target {t.label}: position outside grid bounds")
            if t.height <= 0:
                raise ScenarioError(f"target {t.label}: height must be > 0")
            if t.footprint_radius < 0:
                raise ScenarioError(f"target {t.label}: footprint radius must be >= 0")

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def extent(self) -> tuple[float, float]:
        """(x, y) size in meters."""
        return self.width * self.resolution, self.height * self.resolution

    def in_bounds(self, x: float, y: float) -> bool:
        ex, ey = self.extent
        return 0.0 <= x < ex and 0.0 <= y < ey

    def cell_index(self, x: float, y: float) -> tuple[int, int]:
        """(ix, iy) of the cell containing the point; no bounds check."""
        return int(math.floor(x / self.resolution)), int(math.floor(y / self.resolution))

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (ix + 0.5) * self.resolution, (iy + 0.5) * self.resolution

    def class_at(self, x: float, y: float) -> int:
        """Terrain class at a world point; outside the grid reads as OBSTACLE."""
        if not self.in_bounds(x, y):
            return OBSTACLE
        ix, iy = self.cell_index(x, y)
        return int(self.cells[iy, ix])

    def find_target(self, label: str) -> TargetObject | None:
        for t in self.targets:
            if t.label == label:
                return t
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WorldGrid):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and np.array_equal(self.cells, other.cells)
            and self.targets == other.targets
        )


@dataclass
class Scenario:
    """A mission: world, start pose, prior goal, optional query, budget, seed."""

    world: WorldGrid
    start: tuple[float, float, float]  # x, y, heading (radians)
    goal: tuple[float, float]
    query: str | None = None
    budget: int = 200
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self) -> None:
        if self.world.class_at(self.start[0], self.start[1]) != GROUND:
            raise ScenarioError("start: not on Ground")
        if not self.world.in_bounds(*self.goal):
            raise ScenarioError("goal: outside grid bounds")
        if self.budget < 0:
            raise ScenarioError("budget: must be >= 0")

    def success_reference(self) -> tuple[float, float]:
        """Point against which mission success is measured.

        The true position of the queried target when it exists, the prior
        goal otherwise.
        """
        if self.query is not None:
            t = self.world.find_target(self.query)
            if t is not None:
                return t.position
        return self.goal

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.world == other.world
            and self.start == other.start
            and self.goal == other.goal
            and self.query == other.query
            and self.budget == other.budget
            and self.seed == other.seed
        )


def _parse_floats(value: str, count: tuple[int, ...], lineno: int, key: str) -> list[float]:
    parts = value.split()
    if len(parts) not in count:
        raise ScenarioError(f"line {lineno}: {key}: expected {' or '.join(map(str, count))} numbers")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ScenarioError(f"line {lineno}: {key}: {exc}") from exc


def loads_scenario(text: str, name: str = "scenario") -> Scenario:
    """Parse a scenario from its text form. See `load_scenario` for the format."""
    lines = text.splitlines()
    header: dict[str, str] = {}
    target_specs: list[tuple[int, str, str, float, float]] = []  # lineno, letter, label, h, r
    grid_rows: list[str] = []
    grid_linenos: list[int] = []
    in_grid = False

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not in_grid:
            if line.strip() == "":
                if header or target_specs:
                    in_grid = True
                continue
            if line.startswith("target "):
                parts = line.split()
                if len(parts) != 5:
                    raise ScenarioError(
                        f"line {lineno}: target: expected 'target <letter> <label> <height> <radius>'"
                    )
                letter = parts[1]
                if len(letter) != 1 or not letter.isupper():
                    raise ScenarioError(f"line {lineno}: target: anchor must be a single letter A-Z")
                try:
                    h, r = float(parts[3]), float(parts[4])
                except ValueError as exc:
                    raise ScenarioError(f"line {lineno}: target: {exc}") from exc
                target_specs.append((lineno, letter, parts[2], h, r))
                continue
            if ":" not in line:
                raise ScenarioError(f"line {lineno}: expected 'key: value' header line")
            key, _, value = line.partition(":")
            key = key.strip()
            if key not in _HEADER_KEYS:
                raise ScenarioError(f"line {lineno}: unknown header key '{key}'")
            if key in header:
                raise ScenarioError(f"line {lineno}: duplicate header key '{key}'")
            header[key] = value.strip()
        else:
            if line.strip() == "":
                continue
            grid_rows.append(line)
            grid_linenos.append(lineno)

    if "resolution" not in header:
        raise ScenarioError("line 1: missing required header 'resolution'")
    if "start" not in header:
        raise ScenarioError("line 1: missing required header 'start'")
    if "goal" not in header:
        raise ScenarioError("line 1: missing required header 'goal'")
    if not grid_rows:
        raise ScenarioError(f"line {len(lines)}: missing grid section")

    try:
        resolution = float(header["resolution"])
    except ValueError as exc:
        raise ScenarioError(f"line 1: resolution: {exc}") from exc

    width = len(grid_rows[0])
    anchors: dict[str, tuple[int, int]] = {}
    cells = np.zeros((len(grid_rows), width), dtype=np.uint8)
    for iy, (row, lineno) in enumerate(zip(grid_rows, grid_linenos)):
        if len(row) != width:
            raise ScenarioError(f"line {lineno}: grid row width {len(row)} != {width}")
        for ix, ch in enumerate(row):
            if ch in _CHAR_TO_CLASS:
                cells[iy, ix] = _CHAR_TO_CLASS[ch]
            elif ch.isupper() and ch.isalpha():
                if ch in anchors:
                    raise ScenarioError(f"line {lineno}: duplicate target anchor '{ch}'")
                anchors[ch] = (ix, iy)
                cells[iy, ix] = GROUND  # targets sit on ground; they are vision-only
            else:
                raise ScenarioError(f"line {lineno}: unknown grid character '{ch}'")

    targets: list[TargetObject] = []
    for lineno, letter, label, h, r in target_specs:
        if letter not in anchors:
            raise ScenarioError(f"line {lineno}: target anchor '{letter}' not present in grid")
        ix, iy = anchors[letter]
        pos = ((ix + 0.5) * resolution, (iy + 0.5) * resolution)
        targets.append(TargetObject(label=label, position=pos, height=h, footprint_radius=r))
    declared = {letter for _, letter, *_ in target_specs}
    for letter in anchors:
        if letter not in declared:
            raise ScenarioError(f"grid anchor '{letter}' has no matching target header line")

    world = WorldGrid(resolution=resolution, cells=cells, targets=targets)

    sv = _parse_floats(header["start"], (2, 3), 1, "start")
    start = (sv[0], sv[1], sv[2] if len(sv) == 3 else 0.0)
    gv = _parse_floats(header["goal"], (2,), 1, "goal")

    query = header.get("query") or None
    try:
        budget = int(header.get("budget", "200"))
        seed = int(header.get("seed", "0"))
    except ValueError as exc:
        raise ScenarioError(f"line 1: budget/seed: {exc}") from exc

    return Scenario(
        world=world,
        start=start,
        goal=(gv[0], gv[1]),
        query=query,
        budget=budget,
        seed=seed,
        name=name,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario file.

    Format: header lines `key: value` for resolution, start (x y [heading,
    radians]), goal (x y), query, budget and seed, plus optional
    `target <letter> <label> <height> <radius>` lines; then a blank line and
    the character grid. Grid characters: `.` ground, `#` obstacle, `~`
    hazard, `A`-`Z` target anchor cells (the anchor cell itself is ground).
    Row 0 of the grid is y = 0; column 0 is x = 0.
    """
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    return loads_scenario(path.read_text(), name=path.stem)


def dumps_scenario(scenario: Scenario) -> str:
    """Serialize a scenario to its text form (inverse of `loads_scenario`)."""
    w = scenario.world
    lines = [f"resolution: {w.resolution!r}"]
    x, y, heading = scenario.start
    if heading != 0.0:
        lines.append(f"start: {x!r} {y!r} {heading!r}")
    else:
        lines.append(f"start: {x!r} {y!r}")
    lines.append(f"goal: {scenario.goal[0]!r} {scenario.goal[1]!r}")
    if scenario.query is not None:
        lines.append(f"query: {scenario.query}")
    lines.append(f"budget: {scenario.budget}")
    lines.append(f"seed: {scenario.seed}")

    letters = [chr(ord("A") + i) for i in range(len(w.targets))]
    if len(w.targets) > 26:
        raise ScenarioError("targets: at most 26 targets can be serialized")
    for letter, t in zip(letters, w.targets):
        lines.append(f"target {letter} {t.label} {t.height!r} {t.footprint_radius!r}")

    anchor_cells = {}
    for letter, t in zip(letters, w.targets):
        ix = int(math.floor(t.position[0] / w.resolution))
        iy = int(math.floor(t.position[1] / w.resolution))
        anchor_cells[(ix, iy)] = letter

    lines.append("")
    for iy in range(w.height):
        row = []
        for ix in range(w.width):
            if (ix, iy) in anchor_cells:
                row.append(anchor_cells[(ix, iy)])
            else:
                row.append(_CLASS_TO_CHAR[int(w.cells[iy, ix])])
        lines.append("".join(row))
    return "\n".join(lines) + "\n"


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(scenario))
