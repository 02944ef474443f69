"""Run configuration: every pipeline parameter with its default value.

Config files are flat `key=value` text; keys match the field names below.
CLI flags override file values which override the defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

POLICIES = ("wildos", "vanilla", "lrn")


@dataclass
class RunConfig:
    # geometric mapping & navigation graph
    r_max: float = 10.0          # radius of reliable geometric sensing (m)
    r_f_max: float = 4.0         # cap on node free radius (m)
    n_samples: int = 1000        # node samples per graph update
    r_trav: float = 0.5          # min clearance for a sampled node (m)
    r_edge: float = 8.0          # max node distance for graph edges (m)
    # vision
    image_height: int = 96
    image_width: int = 160
    focal: float = 80.0          # f_x = f_y (pixels)
    h_cam: float = 0.5           # camera mount height (m)
    h_v: float = 100.0           # visual horizon (m), must exceed r_max
    tau_trav: float = 0.9        # visual traversability threshold
    tau_front: float = 0.6       # visual frontier threshold
    # goal triangulation
    n_p: int = 1000              # particles per valid view
    d_min: float = 1.0           # min sampled ray depth (m)
    d_max: float = 100.0         # max sampled ray depth (m)
    eps_ray: float = 0.1         # ray-distance weighting softener (m)
    view_cap: int = 32           # most recent valid views retained
    # frontier scoring
    s_def: float = 0.3           # default score for unseen frontiers
    d_score_max: float = 9.0     # max node distance for scoring (m)
    n_bins: int = 16             # goal-heading bins
    eps_pix: float = 0.05        # pixel-cost softener in image path weights
    # planning
    d_local: float = 5.0         # local goal lookahead along the plan (m)
    alpha: float = 20.0          # score-to-cost scaling weight
    eps_z: float = 1e-6          # log argument softener in score-to-cost
    d_reach: float = 0.5         # goal acceptance radius (m)
    coarse_resolution: float = 2.0  # coarse occupancy grid cell size (m)
    # simulation
    robot_diameter: float = 1.0  # used by the visual frontier oracle (m)
    speed: float = 1.0           # robot advance per tick (m)
    stuck_ticks: int = 50        # consecutive no-progress ticks before Stuck
    # run selection
    policy: str = "wildos"
    seeds: tuple[int, ...] = (0,)

    def validate(self) -> None:
        positive = (
            "r_max", "r_f_max", "r_trav", "r_edge", "focal", "h_cam", "h_v",
            "d_min", "d_max", "d_score_max", "d_local", "d_reach",
            "coarse_resolution", "robot_diameter", "speed", "eps_ray",
            "eps_pix", "eps_z",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name}: must be > 0")
        for name in ("n_samples", "n_p", "view_cap", "image_height", "image_width", "stuck_ticks"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name}: must be > 0")
        if self.n_bins < 4:
            raise ValueError("n_bins: must be >= 4")
        if self.h_v <= self.r_max:
            raise ValueError("h_v: visual horizon must exceed r_max")
        if self.d_min >= self.d_max:
            raise ValueError("d_min: must be < d_max")
        if not 0 <= self.tau_trav <= 1 or not 0 <= self.tau_front <= 1:
            raise ValueError("tau_trav/tau_front: must be in [0, 1]")
        if self.policy not in POLICIES:
            raise ValueError(f"policy: must be one of {POLICIES}")

    def with_overrides(self, overrides: dict[str, str]) -> "RunConfig":
        """Return a copy with string-typed overrides applied (CLI / file)."""
        values = dataclasses.asdict(self)
        for key, raw in overrides.items():
            if key not in values:
                raise ValueError(f"unknown config key '{key}'")
            current = values[key]
            if key == "seeds":
                values[key] = tuple(int(s) for s in str(raw).replace(",", " ").split())
            elif isinstance(current, bool):
                values[key] = str(raw).lower() in ("1", "true", "yes")
            elif isinstance(current, int):
                values[key] = int(raw)
            elif isinstance(current, float):
                values[key] = float(raw)
            else:
                values[key] = raw
        cfg = RunConfig(**values)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path, base: "RunConfig | None" = None) -> "RunConfig":
        base = base if base is not None else cls()
        overrides: dict[str, str] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            overrides[key.strip()] = value.strip()
        return base.with_overrides(overrides)
