"""Pointwise diagnostics for curves: ratio bounds, disc tests against
hypersurfaces, and the derivative checks for entire functions with f^# <= 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .config import TOLERANCES
from .curves import Rect, sphderiv_from_jet


class AdmissibilityError(ValueError):
    """Some n+1 hypersurfaces of the family share a common point."""

    def __init__(self, message: str, subset: tuple):
        super().__init__(message)
        self.subset = subset


@dataclass(frozen=True)
class Hypersurface:
    """Hyperplane {sum_i coeffs[i] * w_i = 0} in P^n."""

    coeffs: tuple

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size < 2 or not np.all(np.isfinite(c)) or np.linalg.norm(c) == 0:
            raise ValueError("hypersurface needs a finite nonzero coefficient vector")
        object.__setattr__(self, "coeffs", tuple(complex(x) for x in c))

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    @classmethod
    def point(cls, a) -> "Hypersurface":
        """For n = 1: the preimage of the value a (``inf`` allowed)."""
        a = complex(a)
        if not np.isfinite(a):
            return cls((1.0, 0.0))
        return cls((-a, 1.0))


# --- ratio bound ---------------------------------------------------------------


@dataclass
class RatioReport:
    K: float
    n: int
    max_ratio: float
    hypothesis_violations: list = field(default_factory=list)
    conclusion_violations: list = field(default_factory=list)

    @property
    def hypothesis_holds(self) -> bool:
        return not self.hypothesis_violations

    def to_json(self) -> dict:
        from .io import complex_to_json

        return {
            "K": self.K,
            "n": self.n,
            "max_ratio": self.max_ratio,
            "hypothesis_holds": self.hypothesis_holds,
            "hypothesis_violations": [
                {"z": complex_to_json(z), "pair": list(p), "value": v} for z, p, v in self.hypothesis_violations
            ],
            "conclusion_violations": [{"z": complex_to_json(z), "value": v} for z, v in self.conclusion_violations],
        }


def ratios_bound_check(curve, K: float, samples) -> RatioReport:
    """Check f^# <= K sqrt(n) where every ratio f_j/f_i has spherical derivative <= K.

    Samples where some ratio exceeds K are listed as hypothesis violations and
    do not enter the conclusion check.
    """
    z = np.atleast_1d(np.asarray(samples, dtype=complex))
    h = curve.jet(z)
    V, D = h.values, h.derivs
    k = V.shape[0]
    n = k - 1
    ok = np.ones(z.shape, dtype=bool)
    hyp = []

    def pair_sphderiv(V, D, i, j):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.abs(D[j] * V[i] - V[j] * D[i]) / (np.abs(V[i]) ** 2 + np.abs(V[j]) ** 2)

    for i, j in itertools.combinations(range(k), 2):
        r = pair_sphderiv(V, D, i, j)
        # a common zero of f_i and f_j: the reduced ratio is continuous there,
        # so read it off at a nearby point
        gap = ~np.isfinite(r)
        if np.any(gap):
            zz = z[gap] + 1e-7 * (1 + np.abs(z[gap]))
            h2 = curve.jet(zz)
            r[gap] = pair_sphderiv(h2.values, h2.derivs, i, j)
        bad = ~(r <= K * (1 + 1e-12))
        for idx in np.flatnonzero(bad):
            hyp.append((complex(z[idx]), (i, j), float(r[idx])))
        ok &= ~bad
    fs = sphderiv_from_jet(h)
    bound = K * math.sqrt(n)
    ratio = fs / bound if bound > 0 else np.where(fs > 0, np.inf, 0.0)
    sel = ratio[ok]
    concl = [(complex(z[i]), float(ratio[i])) for i in np.flatnonzero(ok & (ratio > 1 + 1e-12))]
    return RatioReport(float(K), n, float(sel.max()) if sel.size else float("nan"), hyp, concl)


# --- disc test against hypersurfaces -------------------------------------------------


def check_admissible(hypersurfaces, n: int, rtol: float = 1e-12):
    """Every n+1 of the forms must be linearly independent (no common zero)."""
    forms = [np.asarray(h.vector if isinstance(h, Hypersurface) else h, dtype=complex) for h in hypersurfaces]
    for f in forms:
        if f.size != n + 1:
            raise ValueError(f"hypersurface has {f.size} coefficients, expected {n + 1}")
    if len(forms) < n + 1:
        return
    for sub in itertools.combinations(range(len(forms)), n + 1):
        s = np.linalg.svd(np.array([forms[i] for i in sub]), compute_uv=False)
        if s[-1] <= rtol * s[0]:
            raise AdmissibilityError(f"hypersurfaces {sub} have a common point", sub)


def _best_seeds(Z, res, is_min, cap: int = 4096, level: float = 0.9):
    # nearby zero/pole pairs hide behind O(1) residuals on a coarse grid, so
    # every local minimum below ``level`` seeds Newton
    idx = np.flatnonzero((is_min & (res < level)).ravel())
    if idx.size > cap:
        idx = idx[np.argsort(res.ravel()[idx])[:cap]]
    return Z.ravel()[idx]


def _newton_roots(curve, form, seeds, region_test, max_iter=30, tol=1e-13):
    """Polish grid candidates into zeros of z -> <form, f~(z)>."""
    z = np.asarray(seeds, dtype=complex).copy()
    alive = np.ones(z.shape, dtype=bool)
    for _ in range(max_iter):
        if not np.any(alive):
            break
        h = curve.jet(z[alive])
        L = np.tensordot(form, h.values, axes=(0, 0))
        dL = np.tensordot(form, h.derivs, axes=(0, 0))
        with np.errstate(invalid="ignore", divide="ignore"):
            step = np.where(dL != 0, L / dL, np.nan)
        zz = z[alive] - step
        z[alive] = zz
        done = ~np.isfinite(step) | (np.abs(step) <= tol * np.maximum(1.0, np.abs(zz)))
        idx = np.flatnonzero(alive)
        alive[idx[done]] = False
    z = z[np.isfinite(z)]
    if z.size == 0:
        return z
    h = curve.jet(z)
    L = np.abs(np.tensordot(form, h.values, axes=(0, 0)))
    resid = L / (np.linalg.norm(form) * h.norm())
    z = z[(resid < 1e-10) & region_test(z)]
    if z.size == 0:
        return z
    # merge duplicates converging to the same root
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    groups = tree.query_ball_point(np.column_stack([z.real, z.imag]), r=1e-8)
    keep = sorted({min(g) for g in groups})
    return z[keep]


@dataclass
class DiscReport:
    delta: float
    max_count: int
    worst_center: complex | None
    worst_sets: tuple
    discs: int
    preimages: list

    def to_json(self) -> dict:
        from .io import complex_list_to_json, complex_to_json

        return {
            "delta": self.delta,
            "max_count": self.max_count,
            "worst_center": None if self.worst_center is None else complex_to_json(self.worst_center),
            "worst_sets": list(self.worst_sets),
            "discs": self.discs,
            "preimages": [complex_list_to_json(p) for p in self.preimages],
        }


def _membership_points(curve, forms, U, Vg, to_z, proximity_tol, region_test):
    """Grid points near each E_j plus polished zeros of the linear forms."""
    Z = to_z(U, V=Vg)
    h = curve.jet(Z.ravel())
    nrm = h.norm()
    out = []
    for form in forms:
        L = np.abs(np.tensordot(form, h.values, axes=(0, 0))) / (np.linalg.norm(form) * nrm)
        L = L.reshape(Z.shape)
        near = Z[L < proximity_tol]
        # local minima of the normalised form seed a Newton polish
        pad = np.pad(L, 1, mode="edge")
        core = pad[1:-1, 1:-1]
        is_min = np.ones(L.shape, dtype=bool)
        for di, dj in ((0, 1), (2, 1), (1, 0), (1, 2)):
            is_min &= core <= pad[di:di + L.shape[0], dj:dj + L.shape[1]]
        seeds = _best_seeds(Z, L, is_min)
        roots = _newton_roots(curve, form, seeds, region_test) if seeds.size else np.zeros(0, complex)
        out.append(np.concatenate([near.ravel(), roots]))
    return out


def disc_intersection_test(
    curve,
    hypersurfaces,
    delta: float,
    region: Rect,
    proximity_tol: float | None = None,
    samples_per_disc: int = 6,
) -> DiscReport:
    """Count, for discs of diameter ``delta`` covering ``region``, how many of the
    sets E_j = f^{-1}(H_j) each disc meets.

    E_j is detected by grid proximity of the normalised linear form plus Newton
    polishing of its zeros.
    """
    proximity_tol = TOLERANCES.proximity if proximity_tol is None else proximity_tol
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = curve.dimension
    check_admissible(hypersurfaces, n)
    forms = [np.asarray(h.vector if isinstance(h, Hypersurface) else h, dtype=complex) for h in hypersurfaces]

    h_grid = delta / samples_per_disc
    nx = max(8, int(math.ceil((region.x1 - region.x0) / h_grid)) + 1)
    ny = max(8, int(math.ceil((region.y1 - region.y0) / h_grid)) + 1)
    X, Y = np.meshgrid(np.linspace(region.x0, region.x1, nx), np.linspace(region.y0, region.y1, ny), indexing="ij")

    def to_z(U, V):
        return U + 1j * V

    pts = _membership_points(curve, forms, X, Y, to_z, proximity_tol, region.contains)

    # square lattice of centres with spacing delta/sqrt(2): discs of diameter delta cover the plane
    step = delta / math.sqrt(2)
    cx = np.arange(region.x0, region.x1 + step, step)
    cy = np.arange(region.y0, region.y1 + step, step)
    C = (cx[:, None] + 1j * cy[None, :]).ravel()
    counts = np.zeros(C.size, dtype=int)
    hit = [np.zeros(C.size, dtype=bool) for _ in forms]
    cxy = np.column_stack([C.real, C.imag])
    for j, p in enumerate(pts):
        if p.size == 0:
            continue
        tree = cKDTree(np.column_stack([p.real, p.imag]))
        near = tree.query_ball_point(cxy, r=delta / 2)
        hit[j] = np.array([len(x) > 0 for x in near])
        counts += hit[j]
    k = int(np.argmax(counts)) if counts.size else 0
    best = int(counts[k]) if counts.size else 0
    sets = tuple(j for j in range(len(forms)) if best and hit[j][k])
    roots = [np.unique(np.round(p, 10)) for p in pts]
    return DiscReport(float(delta), best, complex(C[k]) if best else None, sets, int(C.size), roots)


# --- entire functions with f^# <= 1 ------------------------------------------


@dataclass
class ChpmReport:
    checks: dict
    counterexamples: dict
    points: int

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        from .io import complex_to_json

        return {
            "checks": dict(self.checks),
            "passed": self.passed,
            "points": self.points,
            "counterexamples": {
                k: [{"z": complex_to_json(z), "value": v} for z, v in pts] for k, pts in self.counterexamples.items()
            },
        }


CHPM_CHECKS = ("sphderiv", "small_values", "log_gradient", "growth", "derivative")


def chpm_checks(curve, region, n_grid: int = 200, rtol: float = 1e-9, keep: int = 5) -> ChpmReport:
    """Grid checks for f = (1 : f) with f entire and f^# <= 1.

    ``sphderiv``      f^# <= 1
    ``small_values``  |f| <= 1  implies  |f'| <= 2
    ``log_gradient``  |f'/f| <= 2 where |f| > 1
    ``growth``        log|f(z)| <= max(2|z|, 1)
    ``derivative``    |f'| <= 2 max(|f|, 1)
    """
    from .curves import Annulus, Disc

    if curve.dimension != 1:
        raise ValueError("chpm checks need a curve into P^1")
    first = curve.coordinates[0]
    from . import expr as ex

    if not ex.is_constant_one(first):
        raise ValueError("chpm checks need the first coordinate to be 1")
    if isinstance(region, Disc):
        xs = np.linspace(region.center.real - region.radius, region.center.real + region.radius, n_grid)
        ys = np.linspace(region.center.imag - region.radius, region.center.imag + region.radius, n_grid)
    elif isinstance(region, Rect):
        xs = np.linspace(region.x0, region.x1, n_grid)
        ys = np.linspace(region.y0, region.y1, n_grid)
    elif isinstance(region, Annulus):
        xs = np.linspace(-region.r1, region.r1, n_grid)
        ys = xs
    else:
        raise TypeError(f"unsupported region {region!r}")
    Z = (xs[:, None] + 1j * ys[None, :]).ravel()
    Z = Z[region.contains(Z)]
    h = curve.jet(Z)
    fs = sphderiv_from_jet(h)
    V0, V1 = h.values
    D0, D1 = h.derivs
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logf = np.log(np.abs(V1)) - np.log(np.abs(V0))
        fp = (D1 * V0 - V1 * D0) / V0 ** 2
        f = V1 / V0
        absf = np.abs(f)
        absfp = np.abs(fp)
        logd = np.abs(fp / f)
    az = np.abs(Z)
    tests = {
        "sphderiv": (fs, fs <= 1 + rtol),
        "small_values": (absfp, ~(absf <= 1) | (absfp <= 2 * (1 + rtol))),
        "log_gradient": (logd, ~(absf > 1) | (logd <= 2 * (1 + rtol))),
        "growth": (logf, logf <= np.maximum(2 * az, 1.0) + rtol),
        "derivative": (absfp, absfp <= 2 * np.maximum(absf, 1.0) * (1 + rtol)),
    }
    checks, cex = {}, {}
    for name, (val, good) in tests.items():
        bad = np.flatnonzero(~good)
        checks[name] = bad.size == 0
        worst = bad[np.argsort(-np.nan_to_num(val[bad], nan=np.inf))][:keep] if bad.size else bad
        cex[name] = [(complex(Z[i]), float(val[i])) for i in worst]
    return ChpmReport(checks, cex, int(Z.size))
