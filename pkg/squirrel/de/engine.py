"""
Batch differential evolution on the unit cube.

One generation = one batch: best/2 mutation with a sinusoidally decaying F,
binomial crossover with CR ~ N(cr_mean, cr_var), then truncation selection
once the offspring values arrive. The population size equals the batch size.

Members that have never been evaluated (random initial designs) are proposed
as themselves in the next batch instead of producing offspring; their values
then seed the population without advancing the generation counter.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from squirrel.errors import ProtocolError
from squirrel.history import History
from squirrel.space import ConfigSpace, Configuration, decode, project

logger = logging.getLogger(__name__)

F_MIN, F_MAX = 0.05, 1.0


@dataclass(frozen=True)
class DEParams:
    g_max: int
    population_size: int = 8
    freq: float = 0.25
    cr_mean: float = 0.5
    cr_var: float = 0.01

    def __post_init__(self):
        if self.g_max < 1:
            raise ValueError("g_max must be at least 1")
        if not self.freq > 0:
            raise ValueError("freq must be positive")
        if self.population_size < 5:
            raise ValueError("best/2 mutation needs a population of at least 5")


@dataclass
class DEState:
    population: np.ndarray                     # NP x d unit vectors
    values: np.ndarray                         # NaN = not evaluated yet
    generation: int = 0
    pending: Optional[np.ndarray] = None       # NP x d, between propose and select
    pending_is_seed: Optional[np.ndarray] = field(default=None)

    @property
    def size(self) -> int:
        return len(self.population)

    @property
    def evaluated(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def best_index(self) -> int:
        vals = np.where(self.evaluated, self.values, np.inf)
        return int(np.argmin(vals))


# ── initialisation ────────────────────────────────────────────────────────────

def de_init_from_history(
    history: History,
    rng: np.random.Generator,
    population_size: int = 8,
) -> DEState:
    """Incumbent first, the rest sampled from previously evaluated trials."""
    best = history.incumbent_index
    if best is None:
        raise ValueError("DE needs a history with at least one finite trial")

    X = history.unit_vectors()
    y = np.array([t.y for t in history], dtype=float)
    others = np.array([i for i in range(len(y)) if i != best], dtype=int)
    n_rest = population_size - 1

    if len(others) >= n_rest:
        picks = rng.choice(others, size=n_rest, replace=False)
    elif len(others) > 0:
        picks = rng.choice(others, size=n_rest, replace=True)
    else:
        picks = None

    if picks is None:
        members = np.vstack([X[best], rng.random((n_rest, X.shape[1]))])
        values = np.concatenate([[y[best]], np.full(n_rest, np.nan)])
    else:
        members = np.vstack([X[best], X[picks]])
        values = np.concatenate([[y[best]], y[picks]])
    return DEState(population=members, values=values)


def de_init_random(
    space: ConfigSpace,
    rng: np.random.Generator,
    population_size: int = 8,
) -> tuple[DEState, list[Configuration]]:
    """Random population; it is itself the first batch to evaluate."""
    members = np.array([project(space, rng.random(space.dim)) for _ in range(population_size)])
    state = DEState(population=members, values=np.full(population_size, np.nan))
    state.pending = members.copy()
    state.pending_is_seed = np.ones(population_size, dtype=bool)
    return state, [decode(space, u) for u in members]


# ── operators ─────────────────────────────────────────────────────────────────

def sinusoidal_F(g: int, g_max: int, freq: float = 0.25) -> float:
    """
    Decreasing sinusoidal scaling factor.

    F = 1/2 * (sin(2*pi*freq*g + pi) * (g_max - g) / g_max + 1), clamped to [0.05, 1].
    """
    if g_max < 1 or not 0 <= g <= g_max:
        raise ValueError(f"need 0 <= g <= g_max and g_max >= 1 (g={g}, g_max={g_max})")
    s = math.sin(2.0 * math.pi * freq * g + math.pi)
    F = (g_max + s * (g_max - g)) / (2.0 * g_max)
    return min(max(F, F_MIN), F_MAX)


def reflect(v: np.ndarray) -> np.ndarray:
    """Reflect once at the cube faces, then clamp whatever is still outside."""
    v = np.where(v < 0.0, -v, np.where(v > 1.0, 2.0 - v, v))
    return np.clip(v, 0.0, 1.0)


def de_mutate_best2(
    population: np.ndarray,
    values: np.ndarray,
    F: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """V_i = X_best + F (X_r1 - X_r2) + F (X_r3 - X_r4), r1..r4 distinct and != i."""
    n = len(population)
    if n < 5:
        raise ValueError(f"best/2 mutation needs at least 5 members, got {n}")
    vals = np.where(np.isnan(values), np.inf, values)
    best = population[int(np.argmin(vals))]
    mutants = np.empty_like(population)
    for i in range(n):
        donors = np.array([j for j in range(n) if j != i])
        r1, r2, r3, r4 = rng.choice(donors, size=4, replace=False)
        mutants[i] = best + F * (population[r1] - population[r2]) + F * (population[r3] - population[r4])
    return reflect(mutants)


def de_crossover(
    parent: np.ndarray,
    mutant: np.ndarray,
    rng: np.random.Generator,
    cr_mean: float = 0.5,
    cr_var: float = 0.01,
) -> np.ndarray:
    """Binomial crossover; coordinate j_rand always comes from the mutant."""
    if parent.shape != mutant.shape:
        raise ValueError("parent and mutant must have the same dimension")
    d = len(parent)
    cr = min(max(rng.normal(cr_mean, math.sqrt(cr_var)), 0.0), 1.0)
    j_rand = int(rng.integers(d))
    take = rng.random(d) < cr
    take[j_rand] = True
    return np.where(take, mutant, parent)


# ── ask / tell ────────────────────────────────────────────────────────────────

def de_propose_batch(
    state: DEState,
    params: DEParams,
    rng: np.random.Generator,
    space: ConfigSpace,
) -> list[Configuration]:
    if state.pending is not None:
        raise ProtocolError("DE batch already pending; observe it before proposing again")
    if not state.evaluated[state.best_index()]:
        raise ValueError("DE population has no evaluated member")

    g = min(state.generation, params.g_max)
    F = sinusoidal_F(g, params.g_max, params.freq)
    mutants = de_mutate_best2(state.population, state.values, F, rng)

    pending = np.empty_like(state.population)
    seeds = ~state.evaluated
    for i in range(state.size):
        if seeds[i]:
            pending[i] = state.population[i]
        else:
            child = de_crossover(state.population[i], mutants[i], rng, params.cr_mean, params.cr_var)
            pending[i] = project(space, child)

    state.pending = pending
    state.pending_is_seed = seeds
    logger.info("DE generation %d: F=%.3f, %d offspring", state.generation, F, int((~seeds).sum()))
    return [decode(space, u) for u in pending]


def de_select(state: DEState, offspring_values: Sequence[float]) -> DEState:
    """Truncation selection; an offspring replaces its parent when at least as good."""
    if state.pending is None:
        raise ProtocolError("no DE batch pending")
    values = np.asarray(offspring_values, dtype=float)
    if values.shape != (state.size,):
        raise ValueError(f"expected {state.size} offspring values, got {values.size}")

    seeds = state.pending_is_seed
    for i in range(state.size):
        if seeds[i] or values[i] <= state.values[i]:
            state.population[i] = state.pending[i]
            state.values[i] = values[i]

    if not seeds.all():
        state.generation += 1
    state.pending = None
    state.pending_is_seed = None
    return state
