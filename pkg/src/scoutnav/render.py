"""Top-down SVG rendering of episodes: world, trajectory, graph, plan.

Pure string assembly, no drawing dependencies. One SVG per logged tick;
graph snapshots (when collected) add nodes, explored discs and per-bin
frontier score rings.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .harness import EpisodeLog
from .world import HAZARD, OBSTACLE, Scenario

_SCALE = 10.0  # svg units per meter


def _score_color(value: float) -> str:
    """Cold-to-hot ramp for scores in [0, 1]."""
    v = min(max(value, 0.0), 1.0)
    r = int(255 * min(1.0, 2.0 * v))
    b = int(255 * min(1.0, 2.0 * (1.0 - v)))
    g = int(255 * (1.0 - abs(2.0 * v - 1.0)) * 0.8)
    return f"rgb({r},{g},{b})"


def _world_rects(scenario: Scenario) -> list[str]:
    """Terrain cells merged into per-row run rectangles."""
    world = scenario.world
    res = world.resolution
    out = []
    for value, color in ((OBSTACLE, "#444"), (HAZARD, "#9cf")):
        for iy in range(world.height):
            row = world.cells[iy] == value
            if not row.any():
                continue
            diffs = np.diff(np.concatenate(([0], row.view(np.int8), [0])))
            for x0, x1 in zip(np.flatnonzero(diffs == 1), np.flatnonzero(diffs == -1)):
                out.append(
                    f'<rect x="{x0 * res * _SCALE:.1f}" y="{iy * res * _SCALE:.1f}" '
                    f'width="{(x1 - x0) * res * _SCALE:.1f}" height="{res * _SCALE:.1f}" '
                    f'fill="{color}"/>'
                )
    return out


def _svg_point(p, r: float, color: str) -> str:
    return (
        f'<circle cx="{p[0] * _SCALE:.1f}" cy="{p[1] * _SCALE:.1f}" '
        f'r="{r:.1f}" fill="{color}"/>'
    )


def render_tick(
    scenario: Scenario,
    log: EpisodeLog,
    tick_index: int,
    snapshot: dict | None = None,
) -> str:
    """SVG for the state after log.records[tick_index]."""
    world = scenario.world
    w_px = world.extent[0] * _SCALE
    h_px = world.extent[1] * _SCALE
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px:.0f}" '
        f'height="{h_px:.0f}" viewBox="0 0 {w_px:.0f} {h_px:.0f}">',
        f'<rect width="{w_px:.0f}" height="{h_px:.0f}" fill="#eee"/>',
    ]
    parts.extend(_world_rects(scenario))
    for t in world.targets:
        parts.append(_svg_point(t.position, max(2.0, t.footprint_radius * _SCALE), "#c0f"))
    parts.append(_svg_point(scenario.goal, 4.0, "#0a0"))

    if snapshot is not None:
        for node in snapshot["nodes"]:
            parts.append(
                f'<circle cx="{node["x"] * _SCALE:.1f}" cy="{node["y"] * _SCALE:.1f}" '
                f'r="{node["r_e"] * _SCALE:.1f}" fill="#8cf" fill-opacity="0.08"/>'
            )
        for i, j, _ in snapshot["edges"]:
            a = next(n for n in snapshot["nodes"] if n["id"] == i)
            b = next(n for n in snapshot["nodes"] if n["id"] == j)
            parts.append(
                f'<line x1="{a["x"] * _SCALE:.1f}" y1="{a["y"] * _SCALE:.1f}" '
                f'x2="{b["x"] * _SCALE:.1f}" y2="{b["y"] * _SCALE:.1f}" '
                f'stroke="#d66" stroke-width="0.6"/>'
            )
        for node in snapshot["nodes"]:
            color = "#36f" if node["frontier"] else "#3a3"
            parts.append(_svg_point((node["x"], node["y"]), 2.0, color))
            if node["frontier"]:
                n_bins = len(node["scores"])
                for k, s in enumerate(node["scores"]):
                    a0 = 2 * math.pi * (k - 0.5) / n_bins
                    a1 = 2 * math.pi * (k + 0.5) / n_bins
                    r = 5.0
                    x0 = node["x"] * _SCALE + r * math.cos(a0)
                    y0 = node["y"] * _SCALE + r * math.sin(a0)
                    x1 = node["x"] * _SCALE + r * math.cos(a1)
                    y1 = node["y"] * _SCALE + r * math.sin(a1)
                    parts.append(
                        f'<path d="M {x0:.1f} {y0:.1f} A {r} {r} 0 0 1 {x1:.1f} {y1:.1f}" '
                        f'stroke="{_score_color(s)}" stroke-width="1.4" fill="none"/>'
                    )

    trace = log.trace
    if len(trace) > 1:
        upto = trace[: tick_index + 2]
        pts = " ".join(f"{x * _SCALE:.1f},{y * _SCALE:.1f}" for x, y in upto)
        parts.append(f'<polyline points="{pts}" stroke="#06c" stroke-width="1.5" fill="none"/>')
    record = log.records[tick_index]
    if not math.isnan(record.est_x):
        parts.append(_svg_point((record.est_x, record.est_y), 3.0, "#0cc"))
    if not math.isnan(record.g_local_x):
        parts.append(_svg_point((record.g_local_x, record.g_local_y), 2.0, "#fa0"))
    parts.append(_svg_point((record.x, record.y), 3.0, "#f00"))
    parts.append(_svg_point((scenario.start[0], scenario.start[1]), 3.0, "#000"))
    parts.append("</svg>")
    return "\n".join(parts)


def render_episode(log: EpisodeLog, snapshots: list[dict] | None = None) -> list[str]:
    """One SVG per tick; empty logs render to an empty sequence."""
    if log.scenario is None:
        raise ValueError("log: episode log carries no scenario")
    if snapshots is None:
        snapshots = log.graph_snapshots or None
    out = []
    for i in range(len(log.records)):
        snap = None
        if snapshots:
            snap = snapshots[min(i, len(snapshots) - 1)]
        out.append(render_tick(log.scenario, log, i, snap))
    return out


def write_frames(log: EpisodeLog, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, svg in enumerate(render_episode(log)):
        path = out / f"tick{i:04d}.svg"
        path.write_text(svg)
        paths.append(path)
    return paths
