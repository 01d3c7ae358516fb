"""Growth characteristics of holomorphic curves.

T(r) is the circle mean of log||f~|| minus its value at the origin; A(t) is the
area of the disc |z| <= t in the pulled-back Fubini-Study metric divided by pi.
Both are computed by quadrature with doubling until successive estimates
agree. The identity T(r) = int_0^r A(t) dt/t is evaluated through

    int_0^r A(t) dt/t = 2 int_0^r s M(s) log(r/s) ds,

M(s) being the angular mean of (f^#)^2, which avoids a second nested integral.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_QUAD, QuadratureConfig
from .curves import PLANE, PUNCTURED, sphderiv_from_jet


class QuadratureError(ArithmeticError):
    """Doubling reached the maximal node count without meeting the tolerance."""

    def __init__(self, message: str, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class UndefinedOrderError(ArithmeticError):
    pass


class ContourUnsafeError(ValueError):
    """The target value is (nearly) attained on the contour."""


class BasePointWarning(RuntimeWarning):
    pass


# --- circle means ------------------------------------------------------------------


def _log_norm_on_circle(curve, r: float, N: int, offset: bool = False) -> np.ndarray:
    k = np.arange(N)
    theta = 2 * np.pi * (k + (0.5 if offset else 0.0)) / N
    return curve.jet(r * np.exp(1j * theta)).log_norm()


def circle_mean_log_norm(curve, r: float, quad: QuadratureConfig = DEFAULT_QUAD, tol: float | None = None) -> float:
    """(1/2pi) int log||f~(r e^{it})|| dt by the periodic trapezoid rule.

    The node count doubles from ``quad.n_start``; new nodes are the midpoints,
    so each doubling reuses all previous evaluations.
    """
    tol = quad.tol if tol is None else tol
    r_used = r
    for attempt in range(3):
        N = quad.n_start
        vals = _log_norm_on_circle(curve, r_used, N)
        if np.all(np.isfinite(vals)):
            break
        # common zero (or cancellation) on the circle: nudge the radius
        warnings.warn(f"representation degenerates on |z|={r_used:.17g}; radius perturbed", RuntimeWarning)
        r_used = r_used * (1 + 1e-9)
    else:
        raise QuadratureError(f"log||f|| not finite on the circle |z|={r}")
    total = vals.sum()
    est = total / N
    history = [est]
    while N < quad.n_max:
        extra = _log_norm_on_circle(curve, r_used, N, offset=True)
        if not np.all(np.isfinite(extra)):
            raise QuadratureError(f"log||f|| not finite on the circle |z|={r_used}", history)
        total += extra.sum()
        N *= 2
        new = total / N
        history.append(new)
        if abs(new - est) < tol:
            return float(new)
        est = new
    raise QuadratureError(f"circle mean did not converge at |z|={r} with {N} nodes", history[-2:])


def _base_log_norm(curve) -> float:
    h = curve.jet(np.array([0j]))
    if h.degenerate()[0]:
        warnings.warn("representation vanishes or has a pole at 0; using the circle mean at r=1e-4", BasePointWarning)
        return circle_mean_log_norm(curve, 1e-4)
    return float(h.log_norm()[0])


def cartan_T(curve, r: float, tol: float | None = None, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Characteristic T(r) = mean_{|z|=r} log||f~|| - log||f~(0)||."""
    if getattr(curve, "domain", PLANE) != PLANE:
        raise ValueError("cartan_T needs a curve on the plane; use cstar_T")
    if r <= 0:
        raise ValueError("r must be positive")
    return circle_mean_log_norm(curve, r, quad, tol) - _base_log_norm(curve)


# --- disc integrals ----------------------------------------------------------------


def _angular_mean_sq(curve, s: np.ndarray, n_theta: int, center: complex = 0j) -> np.ndarray:
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    Z = center + s[:, None] * np.exp(1j * theta)[None, :]
    fs = sphderiv_from_jet(curve.jet(Z.ravel())).reshape(Z.shape)
    return np.mean(fs ** 2, axis=1)


def _panels(a: float, b: float, min_width: float = 0.25, grade: int = 30) -> np.ndarray:
    """Panel edges on [a, b].

    Discs (a = 0) get dyadic panels graded toward the centre, ``grade`` levels
    past ``min_width``, which tames s*log(s) type endpoint behaviour. Annuli get
    geometric panels of ratio at most 2.
    """
    if a == 0:
        J = max(0, int(math.ceil(math.log2(b / min_width)))) if b > min_width else 0
        return np.concatenate([[0.0], b * 2.0 ** -np.arange(J + grade, -1, -1)])
    lo, hi = math.log(a), math.log(b)
    k = max(1, int(math.ceil(abs(hi - lo) / math.log(2))))
    return np.exp(np.linspace(lo, hi, k + 1))


def _radial_integral(weight, curve, a: float, b: float, tol: float, center: complex = 0j, n_r0: int = 8,
                     n_theta0: int = 64, n_max: int = 256, theta_max: int = 2 ** 14, grade: int = 30) -> float:
    """int_a^b weight(s) * s * M(s) ds with Gauss-Legendre panels x trapezoid angles.

    Angular and radial node counts are refined independently: the angular
    count doubles until the estimate is stable, then the radial count.
    """
    edges = _panels(a, b, grade=grade)
    lo, hi = edges[:-1, None], edges[1:, None]

    def estimate(n_r, n_t):
        x, w = np.polynomial.legendre.leggauss(n_r)
        S = (0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)).ravel()
        Wt = (0.5 * (hi - lo) * w[None, :]).ravel()
        M = _angular_mean_sq(curve, S, n_t, center)
        val = float(np.sum(Wt * weight(S) * S * M))
        if not math.isfinite(val):
            raise QuadratureError("disc integrand is not finite")
        return val

    n_r, n_t = n_r0, n_theta0
    est = estimate(n_r, n_t)
    history = [est]
    while True:
        if n_t < theta_max:
            finer = estimate(n_r, 2 * n_t)
            if abs(finer - est) >= tol / 2:
                n_t *= 2
                est = finer
                history.append(est)
                continue
        if n_r >= n_max:
            break
        finer = estimate(2 * n_r, n_t)
        n_r *= 2
        history.append(finer)
        if abs(finer - est) < tol / 2:
            return finer
        est = finer
    raise QuadratureError("disc quadrature did not converge", history[-2:])


def ahlfors_A(curve, t: float, tol: float | None = None) -> float:
    """A(t) = (1/pi) * area integral of (f^#)^2 over |z| <= t."""
    tol = DEFAULT_QUAD.tol if tol is None else tol
    if t <= 0:
        raise ValueError("t must be positive")
    # the integrand s*M(s) is smooth at 0, so little grading is needed
    return 2.0 * _radial_integral(lambda s: np.ones_like(s), curve, 0.0, t, tol / 2, grade=2)


def jensen_integral(curve, r: float, tol: float | None = None) -> float:
    """int_0^r A(t) dt/t, evaluated as 2 int_0^r s M(s) log(r/s) ds."""
    tol = DEFAULT_QUAD.tol if tol is None else tol
    return 2.0 * _radial_integral(lambda s: np.log(r / s), curve, 0.0, r, tol / 2)


def jensen_consistency(curve, rs, tol: float | None = None) -> list[float]:
    """Residuals T(r) - int_0^r A(t) dt/t."""
    tol = DEFAULT_QUAD.tol if tol is None else tol
    return [cartan_T(curve, r, tol) - jensen_integral(curve, r, tol) for r in rs]


def binormal_mass(curve, delta: float, centers, tol: float = 1e-8) -> tuple[float, list[float]]:
    """Minimum over centres of the area integral of (f^#)^2 over |z - c| < delta."""
    masses = [
        2 * np.pi * _radial_integral(lambda s: np.ones_like(s), curve, 0.0, delta, tol, center=complex(c), grade=2)
        for c in np.atleast_1d(np.asarray(centers, dtype=complex))
    ]
    return float(min(masses)), masses


# --- curves on C* -------------------------------------------------------------------


def _flux(curve, r: float, N: int = 256, tol: float = 1e-12) -> float:
    """Angular mean of Re<z f~', f~>/||f~||^2 on |z| = r: the derivative of the
    circle mean of log||f~|| with respect to log r."""
    est = None
    while N <= 2 ** 16:
        z = r * np.exp(2j * np.pi * np.arange(N) / N)
        h = curve.jet(z)
        num = np.sum(np.real(z[None, :] * h.derivs * np.conj(h.values)), axis=0)
        val = float(np.mean(num / np.sum(np.abs(h.values) ** 2, axis=0)))
        if est is not None and abs(val - est) < tol:
            return val
        est = val
        N *= 2
    raise QuadratureError("flux mean did not converge", (est,))


def cstar_T(curve, r: float, tol: float | None = None) -> float:
    """Circle mean of log||f~|| at radius r minus the mean on the unit circle."""
    if r <= 0:
        raise ValueError("r must be positive")
    return circle_mean_log_norm(curve, r, tol=tol) - circle_mean_log_norm(curve, 1.0, tol=tol)


def cstar_A(curve, r: float, tol: float | None = None) -> float:
    """(1/pi) * area integral of (f^#)^2 between the circles |z| = 1 and |z| = r."""
    tol = DEFAULT_QUAD.tol if tol is None else tol
    if r <= 0:
        raise ValueError("r must be positive")
    if r == 1:
        return 0.0
    a, b = min(r, 1.0), max(r, 1.0)
    return 2.0 * _radial_integral(lambda s: np.ones_like(s), curve, a, b, tol / 2)


def cstar_jensen(curve, r: float, tol: float | None = None) -> float:
    """The right-hand side s log r + |int_1^r A*(t) dt/t| for curves on C*.

    ``s`` is the flux mean on the unit circle; A* is :func:`cstar_A`.
    """
    tol = DEFAULT_QUAD.tol if tol is None else tol
    s0 = _flux(curve, 1.0)
    if r == 1:
        return 0.0
    a, b = min(r, 1.0), max(r, 1.0)
    integral = 2.0 * _radial_integral(lambda s: np.abs(np.log(r / s)), curve, a, b, tol / 2)
    return s0 * math.log(r) + integral


# --- order and bounds ---------------------------------------------------------------


@dataclass
class OrderFit:
    rho: float
    r2: float
    r: list
    T: list

    def to_json(self) -> dict:
        return {"order": self.rho, "fit_r2": self.r2, "r": list(self.r), "T": list(self.T)}


def order_estimate(curve, r0: float, r1: float, points: int = 12, tol: float = 1e-8) -> OrderFit:
    """Slope of log T against log r over the upper half of a geometric radius grid."""
    if not 0 < r0 < r1:
        raise ValueError("need 0 < r0 < r1")
    rs = np.geomspace(r0, r1, points)
    Ts = np.array([cartan_T(curve, float(r), tol) for r in rs])
    return fit_order(rs, Ts)


def fit_order(rs, Ts) -> OrderFit:
    rs = np.asarray(rs, dtype=float)
    Ts = np.asarray(Ts, dtype=float)
    half = rs.size // 2
    x, y = np.log(rs[half:]), Ts[half:]
    # values at rounding level carry no growth information
    if np.any(y <= 1e-12):
        raise UndefinedOrderError("T is not positive on the upper half of the radius grid")
    ly = np.log(y)
    slope, icpt = np.polyfit(x, ly, 1)
    resid = ly - (slope * x + icpt)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid ** 2) / ss) if ss > 0 else 1.0
    return OrderFit(float(slope), r2, rs.tolist(), Ts.tolist())


def normal_type_bound(curve, K: float, rs, tol: float = 1e-8) -> list[tuple[float, float, float, bool]]:
    """Check T(r) <= K^2 r^2 / 2; rows are (r, T, bound, ok)."""
    rows = []
    for r in rs:
        T = cartan_T(curve, float(r), tol)
        b = K * K * r * r / 2
        rows.append((float(r), T, b, bool(T <= b + tol)))
    return rows


# --- counting -----------------------------------------------------------------------


@dataclass
class CountingReport:
    r: list
    n: list
    N: list

    def to_json(self) -> dict:
        return {"r": list(self.r), "n": list(self.n), "N": list(self.N)}


def counting_N(E, rs) -> CountingReport:
    """n_E(r) = #{|e| <= r} and N_E(r) = sum_{|e| <= r} log(r/|e|)."""
    pts = np.abs(np.asarray(E, dtype=complex).reshape(-1))
    if np.any(pts == 0):
        raise ValueError("the point set must not contain 0")
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    ns, Ns = [], []
    for r in rs:
        inside = pts[pts <= r]
        ns.append(int(inside.size))
        Ns.append(float(np.sum(np.log(r / inside))))
    return CountingReport(rs.tolist(), ns, Ns)


def _winding(values: np.ndarray) -> float:
    d = np.angle(np.roll(values, -1) / values)
    return float(np.sum(d) / (2 * np.pi))


def winding_count(curve, a, r: float, samples: int = 1024, safety: float = 1e-6, max_samples: int = 2 ** 20) -> int:
    """#zeros - #poles of f - a in |z| < r for a curve into P^1.

    ``a`` may be ``inf``. The sample count doubles until no step of the
    argument exceeds pi/4.
    """
    if curve.dimension != 1:
        raise ValueError("winding_count needs a curve into P^1")
    a = complex(a)
    N = samples
    while True:
        z = r * np.exp(2j * np.pi * np.arange(N) / N)
        h = curve.jet(z)
        v0, v1 = h.values
        if np.isfinite(a):
            num = v1 - a * v0
            chord = np.abs(num) / (np.sqrt(1 + abs(a) ** 2) * h.norm())
            den = v0
        else:
            num, den = v0, v1
            chord = np.abs(v0) / h.norm()
        if np.min(chord) < safety:
            raise ContourUnsafeError(f"f comes within {np.min(chord):.3g} of the target on |z|={r}; perturb r")
        steps = np.concatenate([np.angle(np.roll(num, -1) / num), np.angle(np.roll(den, -1) / den)])
        if np.max(np.abs(steps)) < np.pi / 4 or N >= max_samples:
            break
        N *= 2
    w = _winding(num) - _winding(den)
    k = int(round(w))
    if abs(w - k) > 1e-6:
        raise ContourUnsafeError(f"winding {w} is not close to an integer")
    return k


# --- report -------------------------------------------------------------------------


@dataclass
class CharReport:
    r: list
    T: list
    A: list
    jensen_residual: list
    order: float | None = None
    fit_r2: float | None = None
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "r": list(self.r),
            "T": list(self.T),
            "A": list(self.A),
            "jensen_residual": list(self.jensen_residual),
            "order": self.order,
            "fit_r2": self.fit_r2,
        }

    @classmethod
    def from_json(cls, obj) -> "CharReport":
        r, T, A, J = obj["r"], obj["T"], obj["A"], obj["jensen_residual"]
        if not len(r) == len(T) == len(A) == len(J):
            raise ValueError("report columns have different lengths")
        return cls(list(r), list(T), list(A), list(J), obj.get("order"), obj.get("fit_r2"))


def char_report(curve, rs, tol: float = 1e-8) -> CharReport:
    """T, A and the Jensen residual at each radius; order fit when >= 4 radii."""
    rs = sorted(float(r) for r in rs)
    punctured = getattr(curve, "domain", PLANE) == PUNCTURED
    Ts, As, Js = [], [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for r in rs:
            if punctured:
                T = cstar_T(curve, r, tol)
                As.append(cstar_A(curve, r, tol))
                Js.append(T - cstar_jensen(curve, r, tol))
            else:
                T = cartan_T(curve, r, tol)
                As.append(ahlfors_A(curve, r, tol))
                Js.append(T - jensen_integral(curve, r, tol))
            Ts.append(T)
    order = r2 = None
    if len(rs) >= 4 and not punctured:
        try:
            fit = fit_order(rs, Ts)
            order, r2 = fit.rho, fit.r2
        except UndefinedOrderError:
            pass
    return CharReport(rs, Ts, As, Js, order, r2, [str(w.message) for w in caught])
