"""Simulated sensor suite: depth-limited geometric sensing and oracle vision.

The geometric sensor produces a robot-centered occupancy window from
line-of-sight ray casting; it cannot tell hazard terrain from ground. The
vision oracle renders, per camera, pixel-aligned maps of visual
traversability, visual frontier confidence and query-object similarity out
to a visual horizon that far exceeds the depth range, standing in for a
learned vision module by reading the ground-truth world.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .world import GROUND, WorldGrid

FREE = 0
OBSTACLE = 1
UNKNOWN = 2

REASON_HORIZON = 0
REASON_OBSTACLE = 1
REASON_TARGET = 2


@dataclass
class TraversabilityGrid:
    """Robot-centered local occupancy window (free / obstacle / unknown)."""

    cells: np.ndarray  # (n, n) uint8
    resolution: float
    origin: tuple[float, float]  # world position of the (0, 0) cell corner
    center: tuple[float, float]  # robot position snapped to its cell center
    r_max: float

    @property
    def size(self) -> int:
        return self.cells.shape[0]

    def local_cell(self, x: float, y: float) -> tuple[int, int] | None:
        """(row, col) of the window cell containing the point, None outside."""
        lx = int(math.floor((x - self.origin[0]) / self.resolution))
        ly = int(math.floor((y - self.origin[1]) / self.resolution))
        if 0 <= lx < self.size and 0 <= ly < self.size:
            return ly, lx
        return None

    def class_at(self, x: float, y: float) -> int:
        cell = self.local_cell(x, y)
        if cell is None:
            return UNKNOWN
        return int(self.cells[cell])

    def cell_center(self, ly: int, lx: int) -> tuple[float, float]:
        return (
            self.origin[0] + (lx + 0.5) * self.resolution,
            self.origin[1] + (ly + 0.5) * self.resolution,
        )

    def segment_blocked(
        self, p0: np.ndarray, p1: np.ndarray, block_unknown: bool = True, skip_last: bool = False
    ) -> bool:
        """Collision query for a straight segment against this window."""
        return kernels.segment_blocked(
            self.cells,
            self.origin[0],
            self.origin[1],
            self.resolution,
            float(p0[0]),
            float(p0[1]),
            float(p1[0]),
            float(p1[1]),
            block_unknown,
            skip_last,
        )


def sense_geometric(world: WorldGrid, pose: np.ndarray, r_max: float) -> TraversabilityGrid:
    """Ray-cast the ground-truth grid into a local occupancy window.

    Only cells with line of sight from the robot cell become known;
    occlusion shadows and everything beyond r_max stay unknown. Hazard
    cells read as free: the depth sensor sees flat terrain there.
    """
    if not world.in_bounds(float(pose[0]), float(pose[1])):
        raise ValueError("pose: outside world bounds")
    res = world.resolution
    cix, ciy = world.cell_index(float(pose[0]), float(pose[1]))
    half = int(math.ceil(r_max / res))
    cells = kernels.los_window(world.cells, cix, ciy, half, r_max / res)
    return TraversabilityGrid(
        cells=cells,
        resolution=res,
        origin=((cix - half) * res, (ciy - half) * res),
        center=world.cell_center(cix, ciy),
        r_max=r_max,
    )


@dataclass(frozen=True)
class CameraRig:
    """Three-camera pinhole rig (left / front / right) plus vision horizon."""

    fx: float
    fy: float
    cx: float
    cy: float
    image_height: int
    image_width: int
    h_cam: float = 0.5
    h_v: float = 100.0
    names: tuple[str, ...] = ("left", "front", "right")
    yaw_offsets: tuple[float, ...] = (math.pi / 2.0, 0.0, -math.pi / 2.0)

    def __post_init__(self) -> None:
        if self.cy >= self.image_height:
            raise ValueError("cy: horizon row must lie inside the image")
        if len(self.names) != len(self.yaw_offsets):
            raise ValueError("names: one yaw offset per camera")

    @classmethod
    def from_config(cls, cfg) -> "CameraRig":
        return cls(
            fx=cfg.focal,
            fy=cfg.focal,
            cx=cfg.image_width / 2.0,
            cy=cfg.image_height / 2.0,
            image_height=cfg.image_height,
            image_width=cfg.image_width,
            h_cam=cfg.h_cam,
            h_v=cfg.h_v,
        )


def ground_pixel_to_range(
    pixel: tuple[float, float], intrinsics: tuple[float, float, float, float], h_cam: float
) -> tuple[float, float] | None:
    """Flat-ground back-projection of a pixel to (forward range Z, lateral X).

    Rows at or above the horizon row have no ground intersection -> None.
    """
    u, v = pixel
    fx, fy, cx, cy = intrinsics
    if v <= cy:
        return None
    z = fy * h_cam / (v - cy)
    x = z * (u - cx) / fx
    return z, x


def camera_pose(position: np.ndarray, yaw: float, h_cam: float) -> tuple[np.ndarray, np.ndarray]:
    """World-frame rotation/translation of a level camera looking along yaw.

    Camera axes: +Z forward (ground plane), +X right, +Y down.
    """
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[s, 0.0, c], [-c, 0.0, s], [0.0, -1.0, 0.0]])
    t = np.array([position[0], position[1], h_cam])
    return rot, t


@dataclass
class VisionFrame:
    """Per-camera oracle vision output for one tick."""

    name: str
    yaw: float
    rotation: np.ndarray  # (3, 3) camera-to-world
    translation: np.ndarray  # (3,) camera center
    intrinsics: tuple[float, float, float, float]  # fx, fy, cx, cy
    t_vis: np.ndarray  # (H, W) float32 in [0, 1]
    f_vis: np.ndarray  # (H, W) float32 in [0, 1]
    s_vis: np.ndarray  # (H, W) uint8 mask
    depth: np.ndarray  # (H, W) float32; range on mask pixels, NaN elsewhere
    tick: int = 0
    _azimuths: np.ndarray | None = field(default=None, repr=False)

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.t_vis.shape

    def column_azimuths(self) -> np.ndarray:
        """(W, 2) unit ground-plane direction of each column's rays."""
        if self._azimuths is None:
            fx, _, cx, _ = self.intrinsics
            a = (np.arange(self.image_shape[1]) - cx) / fx
            fwd = self.rotation[:2, 2]
            right = self.rotation[:2, 0]
            raw = fwd[None, :] + a[:, None] * right[None, :]
            self._azimuths = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        return self._azimuths


def render_vision(
    world: WorldGrid,
    rig: CameraRig,
    pose: np.ndarray,
    query: str | None,
    tick: int = 0,
    robot_diameter: float = 1.0,
) -> list[VisionFrame]:
    """Render the oracle vision maps for every camera of the rig.

    Per column a single ground ray is cast out to the visual horizon.
    Visible ground pixels are traversable unless the cell is hazard.
    Frontier confidence marks the farthest visible traversable pixel of a
    column when exploration plausibly continues there: either the ray
    reached the horizon with ground going on beyond it, or the column sees
    more than a robot diameter deeper than an adjacent blocked column (a
    traversable gap). The similarity mask marks a vertical bar, sized by
    the pinhole model, in columns whose first hit is the queried target.
    """
    if not world.in_bounds(float(pose[0]), float(pose[1])):
        raise ValueError("pose: outside world bounds")
    res = world.resolution
    h, w = rig.image_height, rig.image_width
    fx, fy, cx, cy = rig.fx, rig.fy, rig.cx, rig.cy
    px, py, heading = float(pose[0]), float(pose[1]), float(pose[2])

    tgt_x = np.array([t.position[0] for t in world.targets], dtype=np.float64)
    tgt_y = np.array([t.position[1] for t in world.targets], dtype=np.float64)
    tgt_r = np.array([t.footprint_radius for t in world.targets], dtype=np.float64)
    query_idx = -1
    if query is not None:
        for i, t in enumerate(world.targets):
            if t.label == query:
                query_idx = i
                break

    v_start = int(math.floor(cy)) + 1
    v_arr = np.arange(v_start, h)
    z_rows = fy * rig.h_cam / (v_arr - cy)  # forward range per row, far to near

    a = (np.arange(w) - cx) / fx
    norm = np.sqrt(1.0 + a * a)

    frames: list[VisionFrame] = []
    for name, offset in zip(rig.names, rig.yaw_offsets):
        yaw = heading + offset
        fwd = np.array([math.cos(yaw), math.sin(yaw)])
        right = np.array([math.sin(yaw), -math.cos(yaw)])
        ux = (fwd[0] + a * right[0]) / norm
        uy = (fwd[1] + a * right[1]) / norm
        s_end, reason, hit = kernels.cast_columns(
            world.cells, res, px, py, ux, uy, tgt_x, tgt_y, tgt_r, rig.h_v
        )

        # arc distance of each (row, column) ground point
        s_vu = z_rows[:, None] * norm[None, :]
        visible = (s_vu < s_end[None, :]) & (s_vu <= rig.h_v)
        gx = px + s_vu * ux[None, :]
        gy = py + s_vu * uy[None, :]
        ix = np.clip((gx / res).astype(np.int64), 0, world.width - 1)
        iy = np.clip((gy / res).astype(np.int64), 0, world.height - 1)
        ground = world.cells[iy, ix] == GROUND
        t_sub = (visible & ground).astype(np.float32)

        t_vis = np.zeros((h, w), dtype=np.float32)
        t_vis[v_start:, :] = t_sub

        # farthest visible traversable ground per column (row 0 is farthest)
        has_trav = t_sub.any(axis=0)
        first_row = t_sub.argmax(axis=0)
        ridge_row = np.where(has_trav, first_row + v_start, -1)
        reach = np.where(has_trav, s_vu[first_row, np.arange(w)], 0.0)

        fire = np.zeros(w, dtype=bool)
        for c in range(w):
            if reason[c] == REASON_HORIZON and kernels.ray_interval_all_ground(
                world.cells, res, px, py, ux[c], uy[c], rig.h_v, rig.h_v + robot_diameter, res / 2.0
            ):
                fire[c] = True
        # lateral gaps: at a depth discontinuity between adjacent columns,
        # extend the deep side while it sees more than a robot diameter past
        # the shallow stop; fire the whole run when the traversable opening
        # is physically wide enough for the robot
        for c in range(w - 1):
            lo, hi = reach[c], reach[c + 1]
            if hi - lo > robot_diameter:
                shallow, start, step = lo, c + 1, 1
            elif lo - hi > robot_diameter:
                shallow, start, step = hi, c, -1
            else:
                continue
            run = [start]
            cc = start + step
            while 0 <= cc < w and reach[cc] > shallow + robot_diameter:
                run.append(cc)
                cc += step
            p0x = px + shallow * ux[run[0]]
            p0y = py + shallow * uy[run[0]]
            p1x = px + shallow * ux[run[-1]]
            p1y = py + shallow * uy[run[-1]]
            width = math.hypot(p1x - p0x, p1y - p0y) + shallow / fx
            if width >= robot_diameter:
                for cc in run:
                    fire[cc] = True

        f_vis = np.zeros((h, w), dtype=np.float32)
        for c in np.flatnonzero(fire):
            for k in (0, 1, 2):
                val = 1.0 - k / 3.0
                for cc in ({c} if k == 0 else {c - k, c + k}):
                    if 0 <= cc < w and ridge_row[cc] >= 0:
                        f_vis[ridge_row[cc], cc] = max(f_vis[ridge_row[cc], cc], val)

        s_vis = np.zeros((h, w), dtype=np.uint8)
        depth = np.full((h, w), np.nan, dtype=np.float32)
        if query_idx >= 0:
            for c in np.flatnonzero((reason == REASON_TARGET) & (hit == query_idx)):
                z_hit = s_end[c] / norm[c]
                bar = int(math.ceil(fy * world.targets[query_idx].height / z_hit))
                v0 = int(round(cy - bar / 2.0))
                lo, hi = max(0, v0), min(h, v0 + bar)
                if hi > lo:
                    s_vis[lo:hi, c] = 1
                    depth[lo:hi, c] = s_end[c]

        rot, trans = camera_pose(pose[:2], yaw, rig.h_cam)
        frames.append(
            VisionFrame(
                name=name,
                yaw=yaw,
                rotation=rot,
                translation=trans,
                intrinsics=(fx, fy, cx, cy),
                t_vis=t_vis,
                f_vis=f_vis,
                s_vis=s_vis,
                depth=depth,
                tick=tick,
            )
        )
    return frames


def write_pgm(path, values: np.ndarray) -> None:
    """Dump a [0,1] map as a binary 8-bit PGM image (debug aid)."""
    img = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    data = (img * 255).astype(np.uint8)
    header = f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode()
    with open(path, "wb") as fh:
        fh.write(header + data.tobytes())
