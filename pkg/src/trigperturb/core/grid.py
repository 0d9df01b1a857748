"""
Equispaced and perturbed periodic grids.

For degree N the grid has K = 2N+1 nodes x_k = k h, h = 2 pi / K, -N <= k <= N.
A perturbed grid moves node k to x_k + s_k h with |s_k| <= alpha < 1/2.

Randomness comes from numpy's PCG64 bit generator. Each grid draws from its
own stream, seeded by ``SeedSequence(seed, spawn_key=(N, trial))``, so a grid
depends only on (seed, N, trial) and never on the order in which a sweep
builds its grids.
"""
import csv
import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

MAX_POINTS = 4097


@dataclass(frozen=True)
class EquispacedGrid:
    """The centered K-point equispaced grid for degree N."""

    N: int

    def __post_init__(self):
        if self.N < 0:
            raise ValueError(f"degree must be nonnegative, got {self.N}")
        if 2 * self.N + 1 > MAX_POINTS:
            raise ValueError(f"degree {self.N} needs {2 * self.N + 1} points, capacity is {MAX_POINTS}")

    @property
    def K(self) -> int:
        return 2 * self.N + 1

    @property
    def h(self) -> float:
        return 2 * np.pi / self.K

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.indices * self.h


class StrategyTag(str, enum.Enum):
    NONE = "none"
    UNIFORM_RANDOM = "uniform_random"
    ALTERNATING_MAX = "alternating_max"
    ALL_PLUS_MAX = "all_plus_max"
    RANDOM_SIGNS_MAX = "random_signs_max"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class PerturbStrategy:
    """How shifts are chosen; ``shifts`` is only used by the explicit strategy."""

    tag: StrategyTag
    shifts: Optional[tuple] = None

    @classmethod
    def parse(cls, name: str) -> "PerturbStrategy":
        try:
            tag = StrategyTag(name)
        except ValueError:
            choices = ", ".join(t.value for t in StrategyTag if t is not StrategyTag.EXPLICIT)
            raise ValueError(f"Unknown strategy: {name} (expected one of {choices})")
        if tag is StrategyTag.EXPLICIT:
            raise ValueError("explicit strategy needs a shift array; build it with PerturbStrategy.explicit")
        return cls(tag)

    @classmethod
    def explicit(cls, shifts: Sequence[float]) -> "PerturbStrategy":
        return cls(StrategyTag.EXPLICIT, tuple(float(s) for s in shifts))


@dataclass(frozen=True, eq=False)
class PerturbedGrid:
    """Nodes x_k + s_k h of an equispaced grid with |s_k| <= alpha < 1/2."""

    base: EquispacedGrid
    alpha: float
    shifts: np.ndarray = field(repr=False)
    strategy: StrategyTag = StrategyTag.EXPLICIT

    def __post_init__(self):
        check_alpha(self.alpha)
        shifts = np.array(self.shifts, dtype=np.float64)
        if shifts.shape != (self.base.K,):
            raise ValueError(f"expected {self.base.K} shifts, got shape {shifts.shape}")
        if np.any(np.abs(shifts) > self.alpha):
            worst = float(np.max(np.abs(shifts)))
            raise ValueError(f"shift of magnitude {worst} exceeds alpha={self.alpha}")
        shifts.setflags(write=False)
        object.__setattr__(self, "shifts", shifts)

    in_model = True

    @property
    def N(self) -> int:
        return self.base.N

    @property
    def K(self) -> int:
        return self.base.K

    @property
    def h(self) -> float:
        return self.base.h

    @property
    def nodes(self) -> np.ndarray:
        return self.base.nodes + self.shifts * self.base.h

    def node(self, k: int) -> float:
        return float(self.nodes[k + self.N])


@dataclass(frozen=True, eq=False)
class ScatteredGrid:
    """
    K nodes drawn uniformly over the whole period, outside the alpha model.

    Only used to show how interpolation in unstructured points loses accuracy
    to rounding; no Lebesgue or bound machinery accepts it.
    """

    base: EquispacedGrid
    sorted_nodes: np.ndarray = field(repr=False)

    in_model = False
    alpha = float("nan")
    strategy = "scattered"

    @property
    def N(self) -> int:
        return self.base.N

    @property
    def K(self) -> int:
        return self.base.K

    @property
    def h(self) -> float:
        return self.base.h

    @property
    def nodes(self) -> np.ndarray:
        return self.sorted_nodes


Grid = Union[PerturbedGrid, ScatteredGrid]


def check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha < 0.5:
        raise ValueError(f"alpha must lie in [0, 1/2), got {alpha}")


def equispaced_grid(N: int) -> EquispacedGrid:
    return EquispacedGrid(int(N))


def grid_rng(seed: int, N: int, trial: int = 0) -> np.random.Generator:
    """The PCG64 stream owned by grid (seed, N, trial)."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(N), int(trial)))
    return np.random.Generator(np.random.PCG64(ss))


def perturb_grid(
    g: EquispacedGrid,
    strat: PerturbStrategy,
    alpha: float,
    seed: int = 0,
    trial: int = 0,
) -> PerturbedGrid:
    """
    Perturb ``g`` by up to ``alpha`` spacings per node.

    Deterministic in (strat, alpha, seed, trial); random strategies draw from
    ``grid_rng(seed, g.N, trial)``.
    """
    check_alpha(alpha)
    K = g.K
    k = g.indices
    tag = strat.tag

    if tag is StrategyTag.NONE:
        shifts = np.zeros(K)
    elif tag is StrategyTag.UNIFORM_RANDOM:
        shifts = grid_rng(seed, g.N, trial).uniform(-alpha, alpha, size=K)
    elif tag is StrategyTag.ALTERNATING_MAX:
        shifts = alpha * np.where(k % 2 == 0, 1.0, -1.0)
    elif tag is StrategyTag.ALL_PLUS_MAX:
        shifts = np.full(K, alpha)
    elif tag is StrategyTag.RANDOM_SIGNS_MAX:
        coins = grid_rng(seed, g.N, trial).integers(0, 2, size=K)
        shifts = alpha * (2.0 * coins - 1.0)
    elif tag is StrategyTag.EXPLICIT:
        if strat.shifts is None or len(strat.shifts) != K:
            got = None if strat.shifts is None else len(strat.shifts)
            raise ValueError(f"explicit strategy needs {K} shifts, got {got}")
        shifts = np.array(strat.shifts, dtype=np.float64)
        if not np.all(np.isfinite(shifts)) or np.any(np.abs(shifts) > alpha):
            raise ValueError(f"explicit shifts must lie in [-{alpha}, {alpha}]")
    else:
        raise ValueError(f"Unknown strategy: {tag}")

    return PerturbedGrid(g, float(alpha), np.ascontiguousarray(shifts, dtype=np.float64), tag)


def scattered_grid(g: EquispacedGrid, seed: int = 0, trial: int = 0) -> ScatteredGrid:
    draws = grid_rng(seed, g.N, trial).uniform(-np.pi, np.pi, size=g.K)
    nodes = np.sort(draws)
    nodes.setflags(write=False)
    return ScatteredGrid(g, nodes)


def min_gap(pg: Grid) -> float:
    """Smallest distance between neighbouring nodes, wraparound included."""
    x = pg.nodes
    wrap = 2 * np.pi - (x[-1] - x[0])
    if x.size == 1:
        return float(wrap)
    return float(min(np.min(np.diff(x)), wrap))


def write_grid_csv(pg: PerturbedGrid, path) -> None:
    """Dump a grid as ``k,x_k,s_k,x_tilde_k`` with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "x_k", "s_k", "x_tilde_k"])
        for k, x, s, xt in zip(pg.base.indices, pg.base.nodes, pg.shifts, pg.nodes):
            writer.writerow([int(k), f"{x:.17g}", f"{s:.17g}", f"{xt:.17g}"])
