"""
Squirrel — a switching black-box optimizer with an ask/tell batch interface.
"""

from squirrel.scheduler import SquirrelOptimizer, Stage, stage_for_batch
from squirrel.space import ConfigSpace, ParamSpec, parse_space

__all__ = [
    "ConfigSpace",
    "ParamSpec",
    "SquirrelOptimizer",
    "Stage",
    "parse_space",
    "stage_for_batch",
]
