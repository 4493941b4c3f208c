"""multigen: a deterministic 2.5D multiplayer world engine.

Explicit shared world state (vector map + player poses), per-viewpoint
raycast depth/disparity readouts, deterministic tick dynamics, an
authoritative real-time server, procedural level generation, and a replay /
presence-metric evaluation harness.
"""

from ._kernels import backend_name as kernel_backend
from .dynamics import Action, MotionConfig, advance_world
from .geometry import Pose
from .mapdata import WorldMap, load_map, save_map
from .world import WorldState, add_player, canonical_hash, new_world

__version__ = "0.1.0"

__all__ = [
    "Action",
    "MotionConfig",
    "Pose",
    "WorldMap",
    "WorldState",
    "add_player",
    "advance_world",
    "canonical_hash",
    "kernel_backend",
    "load_map",
    "new_world",
    "save_map",
    "__version__",
]
