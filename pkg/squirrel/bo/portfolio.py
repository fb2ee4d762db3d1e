"""
The BO portfolio: (surrogate, acquisition, output transform) triplets.
"""

import json
import logging

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from squirrel.bo.acquisitions import AcqKind
from squirrel.bo.surrogates import SurrogateKind
from squirrel.bo.transforms import TransformKind
from squirrel.errors import ConfigError

logger = logging.getLogger(__name__)


class Triplet(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    surrogate: SurrogateKind
    acquisition: AcqKind
    transform: TransformKind
    kappa: float = Field(2.0, gt=0)

    @model_validator(mode="after")
    def _check_pairing(self):
        if self.acquisition is AcqKind.LOG_EI and self.transform is not TransformKind.LOG:
            raise ValueError("log_ei is only defined for the log transform")
        return self

    def label(self) -> str:
        return f"{self.surrogate.value}+{self.acquisition.value}+{self.transform.value}"


Portfolio = tuple[Triplet, ...]


def _t(surrogate: str, acquisition: str, transform: str) -> Triplet:
    return Triplet(surrogate=surrogate, acquisition=acquisition, transform=transform)


DEFAULT_PORTFOLIO: Portfolio = (
    _t("gp", "ei", "identity"),
    _t("gp", "pi", "identity"),
    _t("gp", "lcb", "identity"),
    _t("gp", "ei", "copula"),
    _t("gp", "log_ei", "log"),
    _t("rf", "ei", "identity"),
    _t("rf", "log_ei", "log"),
    _t("rf", "ei", "copula"),
)


def default_portfolio(kappa: float = 2.0) -> Portfolio:
    if kappa == 2.0:
        return DEFAULT_PORTFOLIO
    return tuple(t.model_copy(update={"kappa": kappa}) for t in DEFAULT_PORTFOLIO)


def canonical(portfolio: Portfolio) -> str:
    """Stable one-line serialization, e.g. ``gp+ei+identity,gp+pi+identity,...``."""
    return ",".join(t.label() for t in portfolio)


def load_portfolio(path: str) -> Portfolio:
    try:
        with open(path, "r", encoding="utf-8") as f:
            items = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read portfolio file {path}: {e}") from e
    if not isinstance(items, list) or not items:
        raise ConfigError(f"{path}: portfolio must be a non-empty JSON array")

    triplets = []
    for i, item in enumerate(items):
        try:
            triplets.append(Triplet(**item))
        except (ValidationError, TypeError) as e:
            raise ConfigError(f"{path}: triplet #{i} is invalid: {e}") from e
    logger.info("Loaded portfolio of %d triplets from %s", len(triplets), path)
    return tuple(triplets)
