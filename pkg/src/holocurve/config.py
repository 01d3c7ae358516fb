"""Numerical tolerances and grid defaults shared across the package."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Tolerances:
    unitarity: float = 1e-12
    metric: float = 1e-12
    isometry: float = 1e-10
    p_add_w0: float = 1e-9
    # relative cancellation below which a homogeneous vector counts as degenerate
    degeneracy: float = 1e-12
    proximity: float = 1e-3


@dataclass(frozen=True)
class QuadratureConfig:
    n_start: int = 64
    n_max: int = 2 ** 16
    tol: float = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Coarse grid resolution plus local refinement rounds."""

    n1: int = 128
    n2: int = 128
    rounds: int = 2
    zoom: int = 10

    def __post_init__(self):
        if self.n1 < 8 or self.n2 < 8:
            raise ValueError("grid counts must be at least 8")


@dataclass(frozen=True)
class SearchConfig:
    """Polar search grid for the rescaling argmax."""

    radial: int = 256
    angular: int = 512
    rounds: int = 2
    zoom: int = 10


TOLERANCES = Tolerances()
DEFAULT_QUAD = QuadratureConfig()
DEFAULT_GRID = GridSpec()


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    out: str | None = None
    tol: float = 1e-8
    grid: int = 128
    seed: int = 0
    quiet: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.grid < 8:
            raise ValueError("grid counts must be at least 8")
