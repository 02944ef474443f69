"""Desk-scale simulator and planning library for vision-scored frontier
exploration and open-vocabulary object search."""

from .config import POLICIES, RunConfig
from .harness import EpisodeLog, run_episode, run_suite
from .navgraph import NavGraph, update_navigation_graph
from .planner import PlanResult, plan, step_robot
from .scoring import ScoreContext, score_graph
from .sensors import CameraRig, TraversabilityGrid, VisionFrame, render_vision, sense_geometric
from .triangulation import GoalTracker, project_particles, ray_weighted_triangulation
from .world import Scenario, WorldGrid, load_scenario, save_scenario

__all__ = [
    "POLICIES",
    "RunConfig",
    "EpisodeLog",
    "run_episode",
    "run_suite",
    "NavGraph",
    "update_navigation_graph",
    "PlanResult",
    "plan",
    "step_robot",
    "ScoreContext",
    "score_graph",
    "CameraRig",
    "TraversabilityGrid",
    "VisionFrame",
    "render_vision",
    "sense_geometric",
    "GoalTracker",
    "project_particles",
    "ray_weighted_triangulation",
    "Scenario",
    "WorldGrid",
    "load_scenario",
    "save_scenario",
]

__version__ = "0.1.0"
