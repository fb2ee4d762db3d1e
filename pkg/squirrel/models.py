"""
Pydantic models shared across the package.
"""

import math
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

StageTag = Literal["warmstart", "de_init", "bo", "de_final"]


class OptimizerSettings(BaseModel):
    """Every algorithm tunable; defaults come from ``squirrel/config.yaml``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    batch_size: int = Field(8, ge=5)
    n_init_batches: int = Field(3, ge=1)
    n_bo_batches: int = Field(8, ge=0)
    n_de_batches: int = Field(5, ge=0)
    n_warmstart_stored: int = Field(22, ge=0)
    n_warmstart_random: int = Field(2, ge=0)

    portfolio_path: Optional[str] = None
    shuffle_portfolio: bool = True
    lcb_kappa: float = Field(2.0, gt=0)
    n_random_candidates: int = Field(512, ge=1)
    n_local_chains: int = Field(10, ge=0)
    n_local_steps: int = Field(20, ge=0)
    local_step_sigma: float = Field(0.05, gt=0)
    n_chain_starts: int = Field(5, ge=1)
    duplicate_tol: float = Field(1e-9, ge=0)

    gp_restarts: int = Field(32, ge=1)
    gp_maxiter: int = Field(20, ge=1)
    rf_trees: int = Field(64, ge=1)
    rf_min_leaf_size: int = Field(3, ge=1)
    rf_n_thresholds: int = Field(10, ge=1)

    de_freq: float = Field(0.25, gt=0)
    de_cr_mean: float = 0.5
    de_cr_var: float = Field(0.01, ge=0)

    @model_validator(mode="after")
    def _check_warmstart_shape(self):
        init_size = self.n_init_batches * self.batch_size
        if self.n_warmstart_stored + self.n_warmstart_random != init_size:
            raise ValueError(
                f"warmstart design must fill the init phase: "
                f"{self.n_warmstart_stored} + {self.n_warmstart_random} != {init_size}"
            )
        return self

    @property
    def n_batches(self) -> int:
        return self.n_init_batches + self.n_bo_batches + self.n_de_batches

    @property
    def budget(self) -> int:
        return self.n_batches * self.batch_size


class Trial(BaseModel):
    """One evaluated configuration. ``y`` is +inf for failed evaluations."""

    model_config = ConfigDict(frozen=True)

    config: dict[str, Any]
    u: tuple[float, ...]
    y: float
    batch_index: int = Field(ge=0)
    stage_tag: StageTag

    @model_validator(mode="after")
    def _check_y(self):
        if math.isnan(self.y):
            raise ValueError("trial value must not be NaN")
        return self


class RunResult(BaseModel):
    function: str
    optimizer: str
    seed: int
    best_so_far: list[float]
    final_best: float
    wall_time: float = 0.0


class WireRequest(BaseModel):
    """One line of the ask/tell wire protocol."""

    model_config = ConfigDict(extra="forbid")

    op: Literal["init", "suggest", "observe"]
    space: Optional[list[dict[str, Any]]] = None
    seed: Optional[int] = None
    registry_path: Optional[str] = None
    values: Optional[list[Optional[float]]] = None


class RegistryEntryModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    space: list[dict[str, Any]]
    configs: list[dict[str, Any]]


class RegistryFileModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    entries: list[RegistryEntryModel]
