"""Brody-type rescaling: locate the maximiser of (n - |z|) f^#(z) on |z| <= n
and zoom in there so the rescaled curve has spherical derivative 1 at 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import GridSpec, SearchConfig
from .curves import Curve, Disc, maximize_on_region, spherical_derivative, sup_sphderiv_grid

MIN_M = 1e-9


class NumericallyConstantError(ArithmeticError):
    pass


@dataclass
class RescaleResult:
    n: float
    z_n: complex
    M_n: float
    rho_n: float
    rescaled: Curve = field(repr=False)
    evaluations: int = 0

    def to_json(self) -> dict:
        from .io import complex_to_json

        return {
            "n": self.n,
            "z_n": complex_to_json(self.z_n),
            "M_n": self.M_n,
            "rho_n": self.rho_n,
            "rescaled": self.rescaled.to_json(),
            "evaluations": self.evaluations,
        }

    @classmethod
    def from_json(cls, obj) -> "RescaleResult":
        from .io import complex_from_json

        res = cls(float(obj["n"]), complex_from_json(obj["z_n"]), float(obj["M_n"]), float(obj["rho_n"]),
                  Curve.from_json(obj["rescaled"]), int(obj.get("evaluations", 0)))
        if not abs(res.z_n) < res.n or res.rho_n <= 0:
            raise ValueError("inconsistent rescaling record")
        return res


def brody_extract(curve: Curve, n: float, search: SearchConfig = SearchConfig()) -> RescaleResult:
    """Maximise (n - |z|) f^#(z) over |z| <= n and rescale at the maximiser.

    The search is a polar grid with local refinement, so M_n is a lower bound;
    :func:`verify_rescaled` doubles as a check on its quality.
    """
    if n <= 0:
        raise ValueError("n must be positive")

    def weighted(z):
        return (n - np.abs(z)) * spherical_derivative(curve, z, on_degenerate="raise")

    grid = GridSpec(search.radial, search.angular, search.rounds, search.zoom)
    sup = maximize_on_region(weighted, Disc(float(n)), grid)
    if not sup.value >= MIN_M:
        raise NumericallyConstantError(f"max of (n-|z|) f^# is {sup.value:.3g}: curve is numerically constant")
    z_n = sup.point
    fs = spherical_derivative(curve, z_n)
    rho = 1.0 / fs
    return RescaleResult(float(n), complex(z_n), float(sup.value), float(rho), curve.affine(rho, z_n), sup.evaluations)


@dataclass
class VerifyReport:
    g0: float
    max_g: float
    bound: float
    r: float
    normalized: bool
    bound_holds: bool

    @property
    def ok(self) -> bool:
        return self.normalized and self.bound_holds

    def to_json(self) -> dict:
        return dict(self.__dict__, ok=self.ok)


def prelimit_bound(res: RescaleResult, r: float) -> float:
    """(n - |z_n|) / (n - |z_n| - rho_n r); infinite once the disc leaves |z| < n."""
    gap = res.n - abs(res.z_n)
    den = gap - res.rho_n * r
    return gap / den if den > 0 else float("inf")


def verify_rescaled(res: RescaleResult, r: float, slack: float = 0.05, grid: GridSpec = GridSpec(64, 128)) -> VerifyReport:
    """Check g^#(0) = 1 and max_{|z|<=r} g^# <= prelimit bound + slack."""
    g0 = spherical_derivative(res.rescaled, 0.0)
    if r > 0:
        max_g = max(sup_sphderiv_grid(res.rescaled, Disc(float(r)), grid).value, g0)
    else:
        max_g = g0
    bound = prelimit_bound(res, r)
    return VerifyReport(float(g0), float(max_g), bound, float(r), abs(g0 - 1) <= 1e-6, bool(max_g <= bound + slack))
