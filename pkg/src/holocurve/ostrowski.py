"""Meromorphic functions on C* given by zero/pole data.

    f(z) = a z^m prod(zero factors) / prod(pole factors)

A zero (or pole) c with |c| >= 1 contributes the factor (1 - z/c), one with
|c| < 1 the factor (1 - c/z). The circle mean of log|f| over |z| = e^t is then
the piecewise-linear profile phi(t) built here.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import expr as ex
from .config import TOLERANCES, GridSpec
from .curves import PLANE, PUNCTURED, Annulus, Curve, builtin_curve, sup_sphderiv_grid


class TruncationWarning(RuntimeWarning):
    """Omitted factors of a truncated product may matter at the probed moduli."""


@dataclass(frozen=True)
class OstrowskiData:
    a: complex
    m: int
    zeros: tuple = ()
    poles: tuple = ()

    def __post_init__(self):
        a = complex(self.a)
        if a == 0 or not cmath.isfinite(a):
            raise ValueError("leading constant must be finite and nonzero")
        zs = tuple(sorted((complex(c) for c in self.zeros), key=abs))
        ps = tuple(sorted((complex(c) for c in self.poles), key=abs))
        for c in zs + ps:
            if c == 0 or not cmath.isfinite(c):
                raise ValueError("zeros and poles must be finite and nonzero")
        if set(zs) & set(ps):
            raise ValueError("a point is listed both as a zero and as a pole")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "poles", ps)

    def to_json(self) -> dict:
        from .io import complex_list_to_json, complex_to_json

        return {
            "a": complex_to_json(self.a),
            "m": self.m,
            "zeros": complex_list_to_json(self.zeros),
            "poles": complex_list_to_json(self.poles),
        }

    @classmethod
    def from_json(cls, obj) -> "OstrowskiData":
        from .io import complex_from_json, complex_list_from_json

        return cls(complex_from_json(obj["a"]), int(obj["m"]), tuple(complex_list_from_json(obj.get("zeros", []))),
                   tuple(complex_list_from_json(obj.get("poles", []))))


def lehto_data(t: float, k_range: int) -> OstrowskiData:
    """Data reproducing prod_{|k|<=K} (z + t^k)/(z - t^k) exactly.

    For k >= 0 the factor form (1 + z/t^k)/(1 - z/t^k) differs from the
    product's factor by a sign, collected into ``a``.
    """
    ks = range(-k_range, k_range + 1)
    sign = (-1) ** (k_range + 1)
    return OstrowskiData(complex(sign), 0, tuple(-(t ** k) for k in ks), tuple(t ** k for k in ks))


# --- evaluation --------------------------------------------------------------------


def _log_factors(cs, z: np.ndarray) -> np.ndarray:
    out = np.zeros(z.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for c in cs:
            out += np.log(1 - z / c) if abs(c) >= 1 else np.log(1 - c / z)
    return out


def eval_log_repr(d: OstrowskiData, z) -> np.ndarray:
    """log f(z) (complex; real part log|f|), summed factor by factor.

    Zeros give -inf real part and poles +inf; the imaginary part is only
    meaningful modulo 2 pi.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("z = 0 is outside C*")
    with np.errstate(divide="ignore"):
        return cmath.log(d.a) + d.m * np.log(z) + _log_factors(d.zeros, z) - _log_factors(d.poles, z)


def eval_repr(d: OstrowskiData, z):
    """f(z); raises :class:`~holocurve.expr.PoleError` exactly at a listed pole.

    Values beyond the double range overflow to inf; :func:`eval_log_repr`
    keeps them in log form.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    for p in d.poles:
        hit = zz == p
        if np.any(hit):
            raise ex.PoleError(f"pole at z={p}", where=p, order=sum(1 for q in d.poles if q == p))
    L = eval_log_repr(d, zz)
    with np.errstate(over="ignore", invalid="ignore"):
        v = np.where(np.isneginf(L.real), 0j, np.exp(L))
    return complex(v[0]) if scalar else v


def truncation_range(d: OstrowskiData, rel: float = 1e-6) -> tuple[float, float]:
    """Moduli between which the outermost listed factors differ from 1 by < rel.

    Beyond this range the factors dropped by truncating an infinite sequence
    are no longer negligible.
    """
    outer = [abs(c) for c in d.zeros + d.poles if abs(c) >= 1]
    inner = [abs(c) for c in d.zeros + d.poles if abs(c) < 1]
    hi = rel * max(outer) if outer else math.inf
    lo = min(inner) / rel if inner else 0.0
    return lo, hi


def curve_from_data(d: OstrowskiData, compose_exp: bool = False) -> Curve:
    """The curve (1 : f) on C*, or (1 : f(exp w)) on the plane."""
    var = ex.Func("exp", ex.Z) if compose_exp else ex.Z

    def factor(c):
        c = complex(c)
        if abs(c) >= 1:
            return ex.Sub(ex.const(1), ex.Div(var, ex.const(c)))
        return ex.Sub(ex.const(1), ex.Div(ex.const(c), var))

    parts = [ex.const(d.a)]
    if d.m:
        parts.append(ex.Pow(var, d.m))
    parts += [factor(c) for c in d.zeros]
    num = ex.Prod(tuple(parts))
    if d.poles:
        num = ex.Div(num, ex.Prod(tuple(factor(c) for c in d.poles)))
    return Curve((ex.const(1), num), PLANE if compose_exp else PUNCTURED, "ostrowski")


# --- conditions --------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionThresholds:
    """Caller-side bounds for the constants; none are fixed by the theory."""

    C1: float = 16
    C2: float = 4
    C3: float = 1e6
    C4: float = 1e-6
    C5: float = 16


def _signed_groups(d: OstrowskiData):
    """Sorted distinct moduli with zeros-minus-poles counts."""
    mods = np.array([abs(c) for c in d.zeros] + [abs(c) for c in d.poles])
    sgn = np.array([1] * len(d.zeros) + [-1] * len(d.poles))
    if mods.size == 0:
        return mods, sgn
    key = np.round(np.log(mods), 12)
    uniq, inv = np.unique(key, return_inverse=True)
    jumps = np.zeros(uniq.size, dtype=int)
    np.add.at(jumps, inv, sgn)
    return np.exp(uniq), jumps


def ring_count(d: OstrowskiData) -> int:
    mods = np.sort(np.array([abs(c) for c in d.zeros + d.poles]))
    if mods.size == 0:
        return 0
    hi = np.searchsorted(mods, 2 * mods * (1 - 1e-15), side="left")
    lo = np.searchsorted(mods, mods * (1 - 1e-15), side="left")
    return int(np.max(hi - lo))


def imbalance(d: OstrowskiData) -> int:
    _, jumps = _signed_groups(d)
    prefix = np.concatenate([[0], np.cumsum(jumps)])
    return int(prefix.max() - prefix.min())


def _ratio_logs(d: OstrowskiData, centers, same, other) -> np.ndarray:
    same_l = np.log(np.abs(np.asarray(same, dtype=complex))) if same else np.zeros(0)
    other_l = np.log(np.abs(np.asarray(other, dtype=complex))) if other else np.zeros(0)
    out = []
    for c in centers:
        lp = math.log(abs(c))
        lo, hi = min(0.0, lp), max(0.0, lp)
        s_in = same_l[(same_l >= lo) & (same_l <= hi)]
        o_in = other_l[(other_l >= lo) & (other_l <= hi)]
        if lp == 0:
            s_in = same_l[same_l == 0]
            o_in = other_l[other_l == 0]
        out.append(d.m * lp + np.sum(lp - s_in) - np.sum(lp - o_in))
    return np.array(out)


def ratio_log_max(d: OstrowskiData) -> float:
    """log of the largest of the two ratio families, computed in log space."""
    vals = np.concatenate([
        _ratio_logs(d, d.zeros, d.zeros, d.poles),
        _ratio_logs(d, d.poles, d.poles, d.zeros),
    ])
    return float(vals.max()) if vals.size else -math.inf


def min_zero_pole_distance(d: OstrowskiData) -> float:
    if not d.zeros or not d.poles:
        return math.inf
    Z = np.array(d.zeros)
    tree = cKDTree(np.column_stack([Z.real, Z.imag]))
    P = np.array(d.poles)
    dist, _ = tree.query(np.column_stack([P.real, P.imag]))
    return float(dist.min())


def binormal_condition_v(d: OstrowskiData, threshold: float | None = None) -> tuple[bool, float]:
    """Smallest C5 such that every annulus r < |z| < C5 r inside the data's
    modulus span holds a zero and a pole."""
    if not d.zeros or not d.poles:
        return False, math.inf
    allm = [abs(c) for c in d.zeros + d.poles]
    lo, hi = min(allm), max(allm)
    worst = 1.0
    for group in (d.zeros, d.poles):
        m = np.sort(np.abs(np.asarray(group)))
        edges = np.concatenate([[lo], m, [hi]])
        worst = max(worst, float(np.max(edges[1:] / edges[:-1])))
    holds = threshold is None or worst <= threshold
    return bool(holds), worst


@dataclass
class ConditionReport:
    c1: int
    c2: int
    c3: float
    c3_log: float
    c4: float
    c5: float
    passes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def fin(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")

        return {
            "c1": self.c1,
            "c2": self.c2,
            "c3": fin(self.c3),
            "c3_log": fin(self.c3_log),
            "c4": fin(self.c4),
            "c5": fin(self.c5),
            "passes": dict(self.passes),
        }


def check_conditions(d: OstrowskiData, thresholds: ConditionThresholds = ConditionThresholds()) -> ConditionReport:
    """Constants of conditions (i)-(v) for the data, with pass flags against ``thresholds``."""
    if not d.zeros and not d.poles:
        raise ValueError("no zeros or poles to check")
    c1 = ring_count(d)
    c2 = imbalance(d)
    c3_log = ratio_log_max(d)
    c3 = math.exp(c3_log) if c3_log < 700 else math.inf
    c4 = min_zero_pole_distance(d)
    _, c5 = binormal_condition_v(d)
    passes = {
        "i": c1 <= thresholds.C1,
        "ii": c2 <= thresholds.C2,
        "iii": c3_log <= math.log(thresholds.C3),
        "iv": c4 >= thresholds.C4,
        "v": c5 <= thresholds.C5,
    }
    return ConditionReport(c1, c2, c3, c3_log, c4, c5, passes)


# --- phi profile --------------------------------------------------------------------


@dataclass
class PhiProfile:
    """Continuous piecewise-linear phi with integer slopes.

    ``slopes[i]`` is the slope left of ``breakpoints[i]``; ``slopes[-1]`` the
    slope right of the last breakpoint.
    """

    breakpoints: np.ndarray
    slopes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float)
        self.slopes = np.asarray(self.slopes, dtype=int)
        self.values = np.asarray(self.values, dtype=float)
        if self.slopes.size != self.breakpoints.size + 1 or self.values.size != self.breakpoints.size:
            raise ValueError("profile needs one more slope than breakpoints and one value per breakpoint")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must increase strictly")
        if self.breakpoints.size > 1:
            gaps = np.diff(self.breakpoints)
            pred = self.values[:-1] + self.slopes[1:-1] * gaps
            if not np.allclose(pred, self.values[1:], rtol=1e-9, atol=1e-9):
                raise ValueError("values are not consistent with the slopes")

    @property
    def jumps(self) -> np.ndarray:
        return np.diff(self.slopes)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.breakpoints.size == 0:
            raise ValueError("empty profile has no anchor value")
        i = np.searchsorted(self.breakpoints, t, side="right")
        left = np.clip(i - 1, 0, None)
        base = self.values[left] + self.slopes[i] * (t - self.breakpoints[left])
        return np.where(i == 0, self.values[0] + self.slopes[0] * (t - self.breakpoints[0]), base)

    def slope_at(self, t) -> np.ndarray:
        return self.slopes[np.searchsorted(self.breakpoints, np.asarray(t, dtype=float), side="right")]

    def rows(self, t_range=None):
        t = list(self.breakpoints)
        if t_range is not None:
            t = sorted(set([float(t_range[0])] + [x for x in t if t_range[0] < x < t_range[1]] + [float(t_range[1])]))
        return [(x, float(self(x)), int(self.slope_at(x))) for x in t]

    def to_csv(self, path=None, t_range=None) -> str:
        from .io import write_csv

        return write_csv(path, ["t", "phi", "slope"], self.rows(t_range))

    @classmethod
    def from_rows(cls, rows) -> "PhiProfile":
        """Rebuild from (t, phi, right slope) rows, as written by :meth:`to_csv`."""
        rows = sorted((float(t), float(p), int(s)) for t, p, s in rows)
        if len(rows) < 2:
            raise ValueError("need at least two rows")
        ts = np.array([r[0] for r in rows])
        ph = np.array([r[1] for r in rows])
        right = [r[2] for r in rows]
        # the slope left of the first row is not recorded; continue the first one
        return cls(ts, np.array([right[0]] + right), ph)


def phi_function(d: OstrowskiData, t) -> np.ndarray:
    """Closed form of phi at the points t (vectorised)."""
    t = np.asarray(t, dtype=float)
    out = math.log(abs(d.a)) + d.m * t
    for cs, sgn in ((d.zeros, 1), (d.poles, -1)):
        for c in cs:
            lc = math.log(abs(c))
            out = out + sgn * (np.maximum(t - lc, 0) if abs(c) >= 1 else np.maximum(lc - t, 0))
    return out


def build_phi(d: OstrowskiData) -> PhiProfile:
    """phi(t) = mean of log|f| over |z| = e^t as a piecewise-linear profile."""
    mods, jumps = _signed_groups(d)
    bps = np.log(mods) if mods.size else np.array([0.0])
    if mods.size == 0:
        jumps = np.zeros(0, dtype=int)
    # slope far to the left: m minus inner zeros plus inner poles
    inner_z = sum(1 for c in d.zeros if abs(c) < 1)
    inner_p = sum(1 for c in d.poles if abs(c) < 1)
    left = d.m - inner_z + inner_p
    if jumps.size:
        slopes = np.concatenate([[left], left + np.cumsum(jumps)])
    else:
        slopes = np.array([left, left])
    values = phi_function(d, bps)
    return PhiProfile(bps, slopes, values)


def circle_mean_log_abs(d: OstrowskiData, t: float, n_start: int = 256, n_max: int = 2 ** 18, tol: float = 1e-10) -> float:
    """Direct periodic-trapezoid mean of log|f| on |z| = e^t."""
    N = n_start
    prev = None
    r = math.exp(t)
    while N <= n_max:
        z = r * np.exp(2j * np.pi * (np.arange(N) + 0.5) / N)
        val = float(np.mean(eval_log_repr(d, z).real))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        N *= 2
    return prev


def phi_crosscheck(d: OstrowskiData, ts) -> list[tuple[float, float, float]]:
    """(t, profile value, quadrature value) triples."""
    p = build_phi(d)
    return [(float(t), float(p(t)), circle_mean_log_abs(d, float(t))) for t in ts]


def phi_admissible(p: PhiProfile, records: int = 4) -> tuple[bool, float]:
    """Smallest H >= 0 with phi concave wherever phi > H and convex wherever phi < -H.

    A convex kink at height h needs H >= h; a concave kink at height h needs
    H >= -h. A finite profile always has such an H, so a profile is rejected
    only when its required heights climb without bound toward an end: the
    last ``records`` positive requirements (read toward that end) each set a
    new record.
    """
    jumps = p.jumps
    need = np.where(jumps > 0, p.values, np.where(jumps < 0, -p.values, -np.inf))
    if need.size == 0 or not np.any(np.isfinite(need)):
        return True, 0.0
    H = max(0.0, float(np.max(need)))
    for seq in (need, need[::-1]):
        pos = seq[np.isfinite(seq) & (seq > 0)]
        if pos.size < records:
            continue
        tail = pos[-records:]
        if np.all(np.diff(tail) > 0) and tail[-1] == pos.max() and tail[0] >= np.max(pos[:-records], initial=0.0):
            return False, math.inf
    return True, H


# --- disc tests and experiments -------------------------------------------------------


def _target_residual(h, a):
    v0, v1 = h.values
    if cmath.isfinite(a):
        num = v1 - a * v0
        return np.abs(num) / (math.sqrt(1 + abs(a) ** 2) * h.norm()), (-a, 1)
    return np.abs(v0) / h.norm(), (1, 0)


def montel_three_point_test(curve, targets, delta: float, annulus: Annulus, proximity_tol: float | None = None,
                            samples_per_disc: int = 6) -> dict:
    """Max number of the sets E_j = f^{-1}(a_j) met by one disc of intrinsic
    diameter ``delta`` in ``annulus``.

    Work happens in w = log z, where intrinsic discs are Euclidean discs and the
    argument is periodic.
    """
    proximity_tol = TOLERANCES.proximity if proximity_tol is None else proximity_tol
    targets = [complex(a) for a in targets]
    if len(targets) != 3 or len(set(targets)) != 3:
        raise ValueError("need three distinct targets")
    lo, hi = math.log(annulus.r0), math.log(annulus.r1)
    h_grid = delta / samples_per_disc
    nu = max(8, int(math.ceil((hi - lo) / h_grid)) + 1)
    nv = max(8, int(math.ceil(2 * math.pi / h_grid)))
    U, V = np.meshgrid(np.linspace(lo, hi, nu), 2 * np.pi * np.arange(nv) / nv, indexing="ij")
    W = U + 1j * V
    h = curve.jet(np.exp(W).ravel())
    pts = []
    for a in targets:
        res, form = _target_residual(h, a)
        res = res.reshape(W.shape)
        near = list(W[res < proximity_tol])
        pad = np.pad(res, ((1, 1), (0, 0)), mode="edge")
        is_min = (res <= pad[:-2]) & (res <= pad[2:]) & (res <= np.roll(res, 1, 1)) & (res <= np.roll(res, -1, 1))
        seeds = _best_seeds(W, res, is_min)
        near += list(_polish_log(curve, form, seeds, lo, hi))
        pts.append(np.array(near, dtype=complex))
    step = delta / math.sqrt(2)
    cu = np.arange(lo, hi + step, step)
    cv = np.arange(0, 2 * math.pi, step)
    C = (cu[:, None] + 1j * cv[None, :]).ravel()
    cxy = np.column_stack([C.real, C.imag])
    counts = np.zeros(C.size, dtype=int)
    for p in pts:
        if p.size == 0:
            continue
        # periodic copies in the argument direction
        q = np.concatenate([p.real[:, None] + 1j * (np.mod(p.imag, 2 * np.pi)[:, None] + 2 * np.pi * np.array([-1, 0, 1]))]).ravel()
        tree = cKDTree(np.column_stack([q.real, q.imag]))
        counts += np.array([len(x) > 0 for x in tree.query_ball_point(cxy, r=delta / 2)])
    k = int(np.argmax(counts))
    return {
        "max_count": int(counts[k]),
        "worst_center": complex(np.exp(C[k])),
        "discs": int(C.size),
        "preimage_counts": [int(p.size) for p in pts],
    }


def _best_seeds(W, res, is_min, cap: int = 4096, level: float = 0.9):
    # zeros closer together than the grid spacing can hide behind O(1) residuals,
    # so every local minimum below ``level`` seeds Newton
    idx = np.flatnonzero((is_min & (res < level)).ravel())
    if idx.size > cap:
        idx = idx[np.argsort(res.ravel()[idx])[:cap]]
    return W.ravel()[idx]


def _polish_log(curve, form, seeds, lo, hi, iters: int = 40):
    """Newton on w -> form . f~(exp w) from grid seeds; returns roots in log coordinates."""
    w = np.asarray(seeds, dtype=complex).copy()
    if w.size == 0:
        return w
    c = np.asarray(form, dtype=complex)
    for _ in range(iters):
        z = np.exp(w)
        h = curve.jet(z)
        L = c[0] * h.values[0] + c[1] * h.values[1]
        dL = (c[0] * h.derivs[0] + c[1] * h.derivs[1]) * z
        with np.errstate(invalid="ignore", divide="ignore"):
            step = np.where(dL != 0, L / dL, 0)
        step = np.where(np.isfinite(step), step, 0)
        w = w - step
        if np.all(np.abs(step) < 1e-14):
            break
    z = np.exp(w)
    h = curve.jet(z)
    L = np.abs(c[0] * h.values[0] + c[1] * h.values[1]) / (np.linalg.norm(c) * h.norm())
    ok = (L < 1e-10) & (w.real >= lo) & (w.real <= hi)
    return w[ok]


def lehto_experiment(t_values, k_range: int = 40, grid: GridSpec = GridSpec(256, 256)) -> list[dict]:
    """sup |z| f^# over one period annulus [1, t] of the truncated Lehto product."""
    rows = []
    for t in t_values:
        t = float(t)
        if t <= 1:
            raise ValueError("t must exceed 1")
        # dropped factors change f by about 2|z|/t^(K+1) on |z| <= t
        drop = 2.0 * t ** (-k_range)
        if drop > 1e-6:
            warnings.warn(f"t={t:.6g}: truncation at k_range={k_range} leaves relative error ~{drop:.2g}",
                          TruncationWarning)
        c = builtin_curve("lehto_product", t=t, k_range=k_range)
        sup = sup_sphderiv_grid(c, Annulus(1.0, t), grid)
        rows.append({"t": t, "sup": sup.value, "argmax": sup.point, "truncation": drop})
    return rows
