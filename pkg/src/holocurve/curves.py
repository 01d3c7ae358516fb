"""Holomorphic curves into P^n and their spherical derivative.

A curve is anything exposing ``dimension``, ``domain`` and ``jet(z)``; the last
returns an :class:`HJet` holding a holomorphic homogeneous representation and
its derivative at an array of points. :class:`Curve` builds one from coordinate
expressions. Meromorphic coordinates are cleared by multiplying through with the
other coordinates' denominators, so the representation stays finite at poles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .config import DEFAULT_GRID, TOLERANCES, GridSpec
from .search import SupResult, grid_argmax

PLANE = "plane"
PUNCTURED = "punctured"


class DegenerateRepresentationError(ArithmeticError):
    """The homogeneous vector (nearly) vanishes: a common zero of all coordinates."""

    def __init__(self, message: str, where=None):
        super().__init__(message)
        self.where = where


class DomainError(ValueError):
    pass


@dataclass
class HJet:
    """Homogeneous representation ``exp(log_scale) * values`` and its derivative.

    ``values`` and ``derivs`` have shape (n+1, *points); ``mag`` is a rounding
    error bound for ``values`` in units of eps. The vector counts as degenerate
    when its norm falls below ``tolerance * mag``, i.e. when cancellation has
    eaten most of its significant digits.
    """

    values: np.ndarray
    derivs: np.ndarray
    log_scale: np.ndarray
    mag: np.ndarray

    def norm(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=0))

    def log_norm(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.log_scale + np.log(self.norm())

    def degenerate(self, tol: float | None = None) -> np.ndarray:
        tol = TOLERANCES.degeneracy if tol is None else tol
        nrm = self.norm()
        finite = np.isfinite(nrm) & np.isfinite(self.log_scale) & np.all(np.isfinite(self.derivs), axis=0)
        return ~finite | (nrm == 0) | (nrm < tol * self.mag)


def combine_fracs(fracs: list[ex.Frac]) -> HJet:
    """Clear denominators: coordinate i becomes num_i * prod_{j != i} den_j."""
    k = len(fracs)
    shape = fracs[0].nv.shape
    vals, ders, offs, mags = [], [], [], []
    for i, fi in enumerate(fracs):
        v = fi.nv.copy()
        d = fi.nd.copy()
        off = fi.ln.copy()
        m = fi.nm.copy()
        for j, fj in enumerate(fracs):
            if j == i:
                continue
            m = np.abs(v) * fj.dm + np.abs(fj.dv) * m
            d = d * fj.dv + v * fj.dd
            v = v * fj.dv
            off = off + fj.ld
        vals.append(v)
        ders.append(d)
        offs.append(off)
        mags.append(m)
    vals = np.array(vals)
    ders = np.array(ders)
    offs = np.array(offs)
    mags = np.array(mags)
    live = (np.abs(vals) > 0) | (np.abs(ders) > 0) | (mags > 0)
    with np.errstate(invalid="ignore"):
        top = np.max(np.where(live, offs, -np.inf), axis=0)
    top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(invalid="ignore", over="ignore"):
        s = np.where(live, np.exp(offs - top), 0.0)
    vals = vals * s
    ders = ders * s
    mag = np.sqrt(np.sum((mags * s) ** 2, axis=0))
    return HJet(vals.reshape((k,) + shape), ders.reshape((k,) + shape), top, mag)


@dataclass(frozen=True)
class Curve:
    """Curve given by n+1 coordinate expressions on the plane or on C*."""

    coordinates: tuple
    domain: str = PLANE
    label: str = ""

    def __post_init__(self):
        coords = tuple(ex.parse_expr(c) if isinstance(c, str) else c for c in self.coordinates)
        if len(coords) < 2:
            raise ValueError("a curve needs at least two coordinates")
        if self.domain not in (PLANE, PUNCTURED):
            raise ValueError(f"domain must be {PLANE!r} or {PUNCTURED!r}")
        object.__setattr__(self, "coordinates", coords)

    @property
    def dimension(self) -> int:
        return len(self.coordinates) - 1

    def jet(self, z) -> HJet:
        z = np.asarray(z, dtype=complex)
        return combine_fracs([ex.evaluate(c, z) for c in self.coordinates])

    def affine(self, alpha: complex, beta: complex) -> "Curve":
        """The curve z -> f(alpha*z + beta), kept symbolic."""
        coords = tuple(ex.Affine(c, complex(alpha), complex(beta)) for c in self.coordinates)
        return Curve(coords, self.domain, self.label)

    def sources(self) -> list[str]:
        return [ex.to_source(c) for c in self.coordinates]

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "domain": self.domain, "coordinates": self.sources()}

    @classmethod
    def from_json(cls, obj: dict) -> "Curve":
        coords = obj["coordinates"]
        dim = obj.get("dimension", len(coords) - 1)
        if dim != len(coords) - 1:
            raise ValueError(f"dimension {dim} does not match {len(coords)} coordinates")
        return cls(tuple(coords), obj.get("domain", PLANE))


def _check_domain(curve, z: np.ndarray):
    if getattr(curve, "domain", PLANE) == PUNCTURED and np.any(z == 0):
        raise DomainError("z = 0 is not in the domain of a curve on C*")


def point(curve, z: complex) -> np.ndarray:
    """Unit-norm homogeneous coordinates of f(z)."""
    z = np.asarray([complex(z)])
    _check_domain(curve, z)
    h = curve.jet(z)
    if h.degenerate()[0]:
        raise DegenerateRepresentationError(f"degenerate representation at z={z[0]}", where=z[0])
    v = h.values[:, 0]
    return v / np.linalg.norm(v)


def sphderiv_from_jet(h: HJet) -> np.ndarray:
    """f^# = sqrt(sum_{i<j} |f_i' f_j - f_i f_j'|^2) / ||f||^2."""
    V, D = h.values, h.derivs
    k = V.shape[0]
    acc = np.zeros(V.shape[1:])
    for i in range(k):
        for j in range(i + 1, k):
            acc = acc + np.abs(D[i] * V[j] - V[i] * D[j]) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.sqrt(acc) / np.sum(np.abs(V) ** 2, axis=0)


def spherical_derivative(curve, z, on_degenerate: str = "raise"):
    """Spherical derivative of ``curve`` at ``z`` (scalar or array).

    ``on_degenerate`` is ``"raise"`` (default) or ``"nan"``.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_domain(curve, zz)
    h = curve.jet(zz)
    out = sphderiv_from_jet(h)
    bad = h.degenerate()
    if np.any(bad):
        if on_degenerate == "raise":
            where = complex(zz[np.flatnonzero(bad)[0]])
            raise DegenerateRepresentationError(f"degenerate representation at z={where}", where=where)
        out = np.where(bad, np.nan, out)
    return float(out[0]) if scalar else out


# --- regions -----------------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        return (z.real >= self.x0) & (z.real <= self.x1) & (z.imag >= self.y0) & (z.imag <= self.y1)


@dataclass(frozen=True)
class Annulus:
    r0: float
    r1: float

    def __post_init__(self):
        if not 0 < self.r0 <= self.r1:
            raise ValueError("annulus needs 0 < r0 <= r1")

    def contains(self, z) -> np.ndarray:
        a = np.abs(np.asarray(z))
        return (a >= self.r0) & (a <= self.r1)


@dataclass(frozen=True)
class Disc:
    radius: float
    center: complex = 0j

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) <= self.radius


def parse_region(text: str):
    """``rect:x0,x1,y0,y1`` | ``annulus:r0,r1`` | ``disc:R``."""
    kind, _, rest = text.partition(":")
    nums = [float(x) for x in rest.split(",") if x.strip()]
    if kind == "rect" and len(nums) == 4:
        return Rect(*nums)
    if kind == "annulus" and len(nums) == 2:
        return Annulus(*nums)
    if kind == "disc" and len(nums) in (1, 3):
        return Disc(nums[0], complex(*nums[1:]) if len(nums) == 3 else 0j)
    raise ValueError(f"cannot parse region {text!r}")


def region_to_json(region) -> dict:
    from dataclasses import asdict

    d = asdict(region)
    if isinstance(region, Disc):
        from .io import complex_to_json

        d["center"] = complex_to_json(region.center)
    d["kind"] = type(region).__name__.lower()
    return d


def maximize_on_region(fun, region, grid: GridSpec = DEFAULT_GRID) -> SupResult:
    """Grid maximum of ``fun`` over a region (lower-bound estimator)."""
    if isinstance(region, Rect):
        return grid_argmax(
            fun, lambda u, v: u + 1j * v, (region.x0, region.x1), (region.y0, region.y1),
            grid.n1, grid.n2, grid.rounds, grid.zoom,
        )
    if isinstance(region, Annulus):
        lo, hi = math.log(region.r0), math.log(region.r1)
        return grid_argmax(
            fun, lambda u, v: np.exp(u + 1j * v), (lo, hi), (0.0, 2 * np.pi),
            grid.n1, grid.n2, grid.rounds, grid.zoom, v_periodic=True,
        )
    if isinstance(region, Disc):
        c = region.center
        return grid_argmax(
            fun, lambda u, v: c + u * np.exp(1j * v), (0.0, region.radius), (0.0, 2 * np.pi),
            grid.n1, grid.n2, grid.rounds, grid.zoom, v_periodic=True,
        )
    raise TypeError(f"unsupported region {region!r}")


def sup_sphderiv_grid(curve, region, grid: GridSpec = DEFAULT_GRID) -> SupResult:
    """Grid estimate of sup f^# (plane) or sup |z| f^# (C*) over ``region``.

    Reported values are lower bounds for the true supremum.
    """
    punctured = getattr(curve, "domain", PLANE) == PUNCTURED

    def objective(z):
        s = spherical_derivative(curve, z, on_degenerate="raise")
        return np.abs(z) * s if punctured else s

    return maximize_on_region(objective, region, grid)


# --- catalogue -----------------------------------------------------------------


def _lehto_factors(t: float, k_range: int, var: ex.Expr = ex.Z) -> tuple:
    return tuple(
        ex.Div(ex.Add(var, ex.const(t ** k)), ex.Sub(var, ex.const(t ** k)))
        for k in range(-k_range, k_range + 1)
    )


def builtin_curve(name: str, **params) -> Curve:
    """Named example curves.

    ``identity``           (1 : z)
    ``power`` d            (1 : z^d)
    ``exp`` a              (1 : exp(a z))
    ``constant`` c         (1 : c)
    ``cos_curve`` alpha    (cos z : cos(alpha z) : z)
    ``fryntov`` rho, k_max (1 : prod_k (1 - z/2^k)^floor(2^(k rho)))
    ``lehto_product`` t, k_range   prod_{|k|<=k_range} (z + t^k)/(z - t^k) on C*
    ``cstar_identity``     (1 : z) on C*
    ``cstar_power`` m      (1 : z^m) on C*
    """
    one = ex.const(1)
    if name == "identity":
        return Curve((one, ex.Z), PLANE, name)
    if name == "power":
        return Curve((one, ex.Pow(ex.Z, int(params.get("d", 2)))), PLANE, name)
    if name == "exp":
        a = complex(params.get("a", 1.0))
        arg = ex.Z if a == 1 else ex.Mul(ex.const(a), ex.Z)
        return Curve((one, ex.Func("exp", arg)), PLANE, name)
    if name == "constant":
        return Curve((one, ex.const(params.get("c", 0.5))), params.get("domain", PLANE), name)
    if name == "cos_curve":
        alpha = float(params.get("alpha", 0.7))
        return Curve(
            (ex.Func("cos", ex.Z), ex.Func("cos", ex.Mul(ex.const(alpha), ex.Z)), ex.Z), PLANE, name
        )
    if name == "fryntov":
        rho = float(params.get("rho", 0.5))
        k_max = int(params.get("k_max", 20))
        factors = []
        for k in range(1, k_max + 1):
            mult = math.floor(2 ** (k * rho))
            if mult == 0:
                continue
            base = ex.Sub(one, ex.Div(ex.Z, ex.const(2.0 ** k)))
            factors.append(base if mult == 1 else ex.Pow(base, mult))
        return Curve((one, ex.Prod(tuple(factors))), PLANE, name)
    if name == "lehto_product":
        t = float(params.get("t", math.e ** 2))
        if t <= 1:
            raise ValueError("lehto_product needs t > 1")
        k_range = int(params.get("k_range", 40))
        return Curve((one, ex.Prod(_lehto_factors(t, k_range))), PUNCTURED, name)
    if name == "cstar_identity":
        return Curve((one, ex.Z), PUNCTURED, name)
    if name == "cstar_power":
        return Curve((one, ex.Pow(ex.Z, int(params.get("m", 2)))), PUNCTURED, name)
    raise KeyError(f"unknown builtin curve {name!r}")


BUILTIN_NAMES = (
    "identity", "power", "exp", "constant", "cos_curve", "fryntov",
    "lehto_product", "cstar_identity", "cstar_power",
)


@dataclass
class FunctionCurve:
    """Curve defined by a Python callable returning an :class:`HJet`."""

    dimension: int
    jet_fn: object = field(repr=False)
    domain: str = PLANE

    def jet(self, z) -> HJet:
        return self.jet_fn(np.asarray(z, dtype=complex))
