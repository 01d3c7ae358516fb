"""Free interpolation on sparse sets by a contraction iteration.

Given a finite set E with pairwise distances >= K > 25 and target points b_m in
P^n, we build a holomorphic curve f with f(m) = b_m. Each point m carries a
two-point curve g(m - z, a_m) that equals Psi(a_m) at z = m and tends to a
fixed point far away; the curve f adds these up through the surrogate
addition P, and the parameters a_m are found by a Jacobi-type fixed-point
iteration with contraction factor L * delta = 5/11.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .curves import PLANE, HJet, maximize_on_region
from .projective import (
    BRANCH_DELTA,
    BRANCH_LIP,
    BranchError,
    UnitaryMap,
    VPoint,
    _swap,
    as_point,
    big_psi_inv,
    big_psi_local_inv,
    fs_distance,
    fs_distance_many,
    p_add,
    q_reflection,
)

K_MIN = 25.0
CONTRACTION = BRANCH_LIP * BRANCH_DELTA  # 5/11
RATIO_SLACK = 0.05
NOISE_FLOOR = 1e-13


class SparsenessError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


# --- sparse sets -------------------------------------------------------------------


@dataclass(frozen=True)
class SparseSet:
    points: np.ndarray
    K: float

    def __len__(self) -> int:
        return self.points.size

    def nearest(self, z) -> np.ndarray:
        """Index of the nearest point; ties go to the smaller (Re, Im)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        d = np.abs(z[None, :] - self.points[:, None])
        best = d.min(axis=0)
        tied = d <= best[None, :] * (1 + 1e-12) + 1e-300
        # lexicographic rank of the points, used to break ties
        order = np.lexsort((self.points.imag, self.points.real))
        rank = np.empty(order.size, dtype=int)
        rank[order] = np.arange(order.size)
        return np.argmin(np.where(tied, rank[:, None], np.iinfo(int).max), axis=0)


def validate_sparse(points) -> SparseSet:
    """Compute K, the minimum pairwise distance; duplicates are rejected."""
    pts = np.asarray(points, dtype=complex).reshape(-1)
    if pts.size == 0:
        raise ValueError("need at least one point")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    if pts.size == 1:
        return SparseSet(pts, math.inf)
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    d, _ = tree.query(np.column_stack([pts.real, pts.imag]), k=2)
    K = float(d[:, 1].min())
    if K == 0:
        raise ValueError("duplicate points")
    return SparseSet(pts, K)


# --- the two-point curve ------------------------------------------------------------


def _g_parts(u: np.ndarray, a: VPoint):
    """Values and u-derivatives of (u^4+1 : u^4+4u+zeta_1 : u^4+zeta_2 : ...),
    composed with the swap of the sheet. Shape (n+1, len(u))."""
    u = np.asarray(u, dtype=complex)
    u3 = u ** 3
    u4 = u3 * u
    n = a.n
    vals = np.empty((n + 1,) + u.shape, dtype=complex)
    ders = np.empty_like(vals)
    vals[0] = u4 + 1
    ders[0] = 4 * u3
    for j in range(1, n + 1):
        vals[j] = u4 + a.zeta[j - 1]
        ders[j] = 4 * u3
    vals[1] += 4 * u
    ders[1] += 4
    if a.sheet:
        vals = _swap(vals.T, a.sheet).T
        ders = _swap(ders.T, a.sheet).T
    return vals, ders


def two_point_g(z, a: VPoint) -> np.ndarray:
    """g(z, a): equals Psi(a) at z = 0 and tends to (1:1:...:1) as z -> inf."""
    v, _ = _g_parts(np.atleast_1d(np.asarray(z, dtype=complex)), a)
    return v[:, 0] if np.ndim(z) == 0 else v


def g_q(z, a: VPoint, U: UnitaryMap):
    """U g(z, a), which tends to (1:0:...:0); values and z-derivatives."""
    v, d = _g_parts(np.atleast_1d(np.asarray(z, dtype=complex)), a)
    return U.matrix @ v, U.matrix @ d


@dataclass
class GCheckReport:
    samples: int
    violations: dict
    worst_ratio: dict

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def to_json(self) -> dict:
        return {"samples": self.samples, "violations": dict(self.violations), "worst_ratio": dict(self.worst_ratio),
                "ok": self.ok}


def g_properties_check(n: int, zs, pairs) -> GCheckReport:
    """Check the far-field bounds of g at |z| >= 3.

    ``pairs`` is a list of (a', a'') on a common sheet. Reported ratios are
    observed value / bound; a ratio above 1 is a violation.

    (c)      dist(g(z,a), (1:...:1)) <= (25/4)|z|^-3
    (d)      dist(g(z,a'), g(z,a'')) <= (5/4)||a'-a''|| |z|^-4
    (estim)  ||psi^-1(U g(z,a))|| <= 7|z|^-3
    (estim2) ||psi^-1(U g(z,a')) - psi^-1(U g(z,a''))|| <= 2||a'-a''|| |z|^-4
    """
    zs = np.asarray(zs, dtype=complex).reshape(-1)
    if np.any(np.abs(zs) < 3):
        raise ValueError("samples need |z| >= 3")
    U = q_reflection(n)
    ones = np.ones(n + 1, dtype=complex)
    worst = {"c": 0.0, "d": 0.0, "estim": 0.0, "estim2": 0.0}
    bad = {k: 0 for k in worst}
    for z, (a1, a2) in zip(zs, pairs):
        if a1.sheet != a2.sheet:
            raise ValueError("pairs must lie on a common sheet")
        r = abs(z)
        g1 = two_point_g(z, a1)
        g2 = two_point_g(z, a2)
        da = float(np.linalg.norm(a1.zeta - a2.zeta))
        w1 = U.matrix @ g1
        w2 = U.matrix @ g2
        c1 = w1[1:] / w1[0]
        c2 = w2[1:] / w2[0]
        obs = {
            "c": (fs_distance(g1, ones), 25 / 4 * r ** -3),
            "d": (fs_distance(g1, g2) if da > 0 else 0.0, 5 / 4 * da * r ** -4),
            "estim": (float(np.linalg.norm(c1)), 7 * r ** -3),
            "estim2": (float(np.linalg.norm(c1 - c2)), 2 * da * r ** -4),
        }
        for k, (val, bound) in obs.items():
            if bound > 0:
                worst[k] = max(worst[k], val / bound)
            if val > bound * (1 + 1e-12) + 1e-15:
                bad[k] += 1
    return GCheckReport(int(zs.size), bad, worst)


# --- lattice sums -------------------------------------------------------------------


def lattice_bounds_check(E: SparseSet, z: complex) -> dict:
    """Sums of |z-m|^-3 and |z-m|^-4 over m != s(z), against 200 K^-3 and 800 K^-4."""
    z = complex(z)
    s = int(E.nearest(z)[0])
    others = np.delete(E.points, s)
    d = np.abs(z - others)
    sum3 = float(np.sum(d ** -3.0))
    sum4 = float(np.sum(d ** -4.0))
    b3 = 200 * E.K ** -3 if math.isfinite(E.K) else 0.0
    b4 = 800 * E.K ** -4 if math.isfinite(E.K) else 0.0
    return {"s": complex(E.points[s]), "sum3": sum3, "sum4": sum4, "bound3": b3, "bound4": b4,
            "ok": sum3 <= b3 + 1e-300 and sum4 <= b4 + 1e-300}


def square_lattice_sums(K: float, z: complex, radius_factor: float = 2000.0) -> dict:
    """The same sums for the infinite lattice K(Z + iZ): exact over |m| <= R with
    R = radius_factor * K, plus a rigorous bound for the tail.

    Each lattice point owns a K x K square whose points w satisfy
    |m - z| >= |w - z| - K/sqrt(2); integrating over |w - z| >= R - K/sqrt(2)
    bounds the tail.
    """
    z = complex(z)
    R = radius_factor * K
    N = int(math.ceil(R / K))
    ks = np.arange(-N, N + 1, dtype=float)
    total3 = total4 = 0.0
    s = complex(round(z.real / K) * K, round(z.imag / K) * K)
    for kx in ks:
        col = K * kx + 1j * K * ks
        col = col[np.abs(col) <= R]
        col = col[col != s]
        d = np.abs(z - col)
        total3 += float(np.sum(d ** -3.0))
        total4 += float(np.sum(d ** -4.0))
    c = K / math.sqrt(2)
    # tail region |m| > R is contained in |m - z| > R - |z|
    rho0 = R - abs(z) - c
    if rho0 <= c:
        raise ValueError("truncation radius too small for the tail bound")
    x = rho0 - c
    tail3 = 2 * math.pi / K ** 2 * (1 / x + c / (2 * x ** 2))
    tail4 = 2 * math.pi / K ** 2 * (1 / (2 * x ** 2) + c / (3 * x ** 3))
    b3, b4 = 200 * K ** -3, 800 * K ** -4
    return {"s": s, "sum3": total3, "sum4": total4, "tail3": tail3, "tail4": tail4, "bound3": b3, "bound4": b4,
            "ok": total3 + tail3 <= b3 and total4 + tail4 <= b4}


# --- the assembled curve ------------------------------------------------------------


def _chart(v, d):
    """psi^-1 of a stacked jet: zeta = v[1:]/v[0] and its derivative."""
    with np.errstate(divide="ignore", invalid="ignore"):
        zeta = v[1:] / v[0]
        dzeta = (d[1:] * v[0] - v[1:] * d[0]) / v[0] ** 2
    return zeta, dzeta


@dataclass
class Interpolant:
    """The curve f(z, a) for a parameter assignment ``a`` on the set E.

    Coordinates are (w_0 : w_j + w_0 phi_j) with w = U g(s - z, a_s) and
    phi = sum_{m != s} psi^-1(U g(m - z, a_m)); on the branch w_0 != 0 this
    is P(w, phi).
    """

    E: SparseSet
    assignment: list
    U: UnitaryMap
    domain: str = PLANE
    phi_max: float = field(default=0.0, init=False)

    @property
    def dimension(self) -> int:
        return self.U.matrix.shape[0] - 1

    def _terms(self, z: np.ndarray):
        n = self.dimension
        M = len(self.E)
        W = np.empty((M, n + 1, z.size), dtype=complex)
        D = np.empty_like(W)
        for i, (m, a) in enumerate(zip(self.E.points, self.assignment)):
            v, d = g_q(m - z, a, self.U)
            W[i], D[i] = v, -d  # chain rule for u = m - z
        return W, D

    def phi(self, z, s=None):
        """phi^s(z, a) and its z-derivative; s defaults to the nearest point."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        s = self.E.nearest(z) if s is None else np.broadcast_to(np.asarray(s), z.shape)
        W, D = self._terms(z)
        phi = np.zeros((self.dimension, z.size), dtype=complex)
        dphi = np.zeros_like(phi)
        for i in range(len(self.E)):
            mask = s != i
            if not np.any(mask):
                continue
            zeta, dzeta = _chart(W[i][:, mask], D[i][:, mask])
            phi[:, mask] += zeta
            dphi[:, mask] += dzeta
        norms = np.linalg.norm(phi, axis=0)
        if norms.size:
            self.phi_max = max(self.phi_max, float(np.max(norms)))
        return phi, dphi, s, W, D

    def jet(self, z) -> HJet:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        phi, dphi, s, W, D = self.phi(z)
        idx = np.arange(z.size)
        w = W[s, :, idx].T
        dw = D[s, :, idx].T
        vals = np.empty_like(w)
        ders = np.empty_like(w)
        vals[0], ders[0] = w[0], dw[0]
        vals[1:] = w[1:] + w[0] * phi
        ders[1:] = dw[1:] + dw[0] * phi + w[0] * dphi
        nrm = np.linalg.norm(vals, axis=0)
        return HJet(vals, ders, np.zeros(z.size), 4.0 * nrm)

    def point(self, z) -> np.ndarray:
        h = self.jet(np.array([complex(z)]))
        v = h.values[:, 0]
        return v / np.linalg.norm(v)


def assemble_f(z, E: SparseSet, assignment, U: UnitaryMap | None = None) -> np.ndarray:
    """f(z, a) as a unit homogeneous vector."""
    n = assignment[0].n
    U = q_reflection(n) if U is None else U
    f = Interpolant(E, list(assignment), U)
    phi, _, _, _, _ = f.phi(np.array([complex(z)]))
    if np.linalg.norm(phi[:, 0]) >= BRANCH_DELTA:
        raise SparsenessError(f"tail sum has norm {np.linalg.norm(phi[:, 0]):.4g} >= 1/11; E is not sparse enough")
    return f.point(z)


# --- problems and the solver --------------------------------------------------------


@dataclass
class InterpProblem:
    E: SparseSet
    targets: list
    n: int

    def __post_init__(self):
        self.targets = [as_point(b) for b in self.targets]
        if len(self.targets) != len(self.E):
            raise ValueError("need one target per point")
        for b in self.targets:
            if b.size != self.n + 1:
                raise ValueError(f"target has {b.size} coordinates, expected {self.n + 1}")

    @classmethod
    def build(cls, points, targets, n: int | None = None) -> "InterpProblem":
        E = validate_sparse(points)
        t = [np.asarray(b, dtype=complex) for b in targets]
        return cls(E, t, (t[0].size - 1) if n is None else n)

    def to_json(self) -> dict:
        from .io import complex_list_to_json

        return {
            "points": complex_list_to_json(self.E.points),
            "targets": [complex_list_to_json(b) for b in self.targets],
            "dimension": self.n,
        }

    @classmethod
    def from_json(cls, obj) -> "InterpProblem":
        from .io import complex_list_from_json

        pts = complex_list_from_json(obj["points"])
        tg = [np.array(complex_list_from_json(b)) for b in obj["targets"]]
        return cls.build(pts, tg, int(obj["dimension"]))


@dataclass
class InterpState:
    assignment: list
    initial: list
    iterations: int
    steps: list
    residuals: list
    phi_tail_max: float
    converged: bool

    @property
    def ratios(self) -> list:
        """Successive step ratios, for steps above the rounding floor."""
        out = []
        for k in range(1, len(self.steps)):
            if self.steps[k - 1] > NOISE_FLOOR and self.steps[k] > NOISE_FLOOR:
                out.append(self.steps[k] / self.steps[k - 1])
        return out

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    @property
    def displacement(self) -> float:
        return max(float(np.linalg.norm(a.zeta - b.zeta)) for a, b in zip(self.assignment, self.initial))

    def to_json(self) -> dict:
        return {
            "assignment": [a.to_json() for a in self.assignment],
            "initial": [a.to_json() for a in self.initial],
            "iterations": self.iterations,
            "step_norms": list(self.steps),
            "step_ratios": self.ratios,
            "residuals": list(self.residuals),
            "max_residual": self.max_residual,
            "displacement": self.displacement,
            "phi_tail_max": self.phi_tail_max,
            "converged": self.converged,
        }

    @classmethod
    def from_json(cls, obj) -> "InterpState":
        return cls([VPoint.from_json(a) for a in obj["assignment"]], [VPoint.from_json(a) for a in obj["initial"]],
                   int(obj["iterations"]), list(obj["step_norms"]), list(obj["residuals"]),
                   float(obj["phi_tail_max"]), bool(obj["converged"]))


def _tail_at_points(problem: InterpProblem, assignment, U) -> np.ndarray:
    """phi_m(a) for every m in E, shape (n, |E|)."""
    f = Interpolant(problem.E, assignment, U)
    phi, _, _, _, _ = f.phi(problem.E.points, s=np.arange(len(problem.E)))
    return phi


def residuals(problem: InterpProblem, assignment, U: UnitaryMap | None = None) -> list[float]:
    """fs_distance(f(m, a), b_m), computed from scratch."""
    U = q_reflection(problem.n) if U is None else U
    f = Interpolant(problem.E, assignment, U)
    h = f.jet(problem.E.points)
    return fs_distance_many(h.values.T, np.array(problem.targets)).tolist()


def solve_interpolation(problem: InterpProblem, tol: float = 1e-12, k_max: int = 200,
                        require_sparse: bool = True, ratio_patience: int = 3) -> InterpState:
    """Find a with f(m, a) = b_m for all m in E.

    a^0_m is a W-point over U b_m; then every sweep sets
    a^k_m = local inverse of U P(b_m, -phi_m(a^{k-1})) on the branch through
    a^0_m. Stops once the sup-norm step drops below ``tol``.
    """
    if require_sparse and not problem.E.K > K_MIN:
        raise SparsenessError(f"K = {problem.E.K:.4g} does not exceed {K_MIN}")
    U = q_reflection(problem.n)
    a0 = [big_psi_inv(U.matrix @ b) for b in problem.targets]
    a = list(a0)
    steps: list[float] = []
    tail_max = 0.0
    over = 0
    converged = False
    k = 0
    for k in range(1, k_max + 1):
        phi = _tail_at_points(problem, a, U)
        tail_max = max(tail_max, float(np.max(np.linalg.norm(phi, axis=0))))
        new = []
        for i, (b, anchor) in enumerate(zip(problem.targets, a0)):
            if np.linalg.norm(phi[:, i]) >= BRANCH_DELTA:
                raise SparsenessError(f"tail sum at point {i} has norm >= 1/11")
            target = U.matrix @ p_add(b, -phi[:, i])
            try:
                new.append(big_psi_local_inv(target, anchor))
            except BranchError as exc:
                raise ConvergenceError(f"local inverse failed at point {i}: {exc}", point=i) from exc
        step = max(float(np.linalg.norm(x.zeta - y.zeta)) for x, y in zip(new, a))
        a = new
        steps.append(step)
        if len(steps) >= 3 and steps[-2] > NOISE_FLOOR and step > NOISE_FLOOR:
            over = over + 1 if step / steps[-2] > CONTRACTION + RATIO_SLACK else 0
            if over >= ratio_patience:
                raise ConvergenceError(f"step ratio above {CONTRACTION + RATIO_SLACK:.3f} for {over} sweeps")
        if step < tol:
            converged = True
            break
    res = residuals(problem, a, U)
    return InterpState(a, a0, k, steps, res, tail_max, converged)


def normalized_problem(problem: InterpProblem, K_ref: float = 26.0) -> tuple[InterpProblem, float]:
    """Shrink E by lam = K / K_ref so that it is exactly K_ref-sparse.

    The direct construction has f^# of order one whatever K is; solving the
    shrunk problem and composing with z / lam gives sup f^# ~ 1/K instead.
    """
    if not math.isfinite(problem.E.K):
        return problem, 1.0
    lam = problem.E.K / K_ref
    return InterpProblem.build(problem.E.points / lam, problem.targets, problem.n), lam


def solve_normalized(problem: InterpProblem, K_ref: float = 26.0, **kw) -> tuple[InterpState, float]:
    scaled, lam = normalized_problem(problem, K_ref)
    return solve_interpolation(scaled, **kw), lam


class ScaledInterpolant:
    """z -> f(z / scale) for an interpolant f of the shrunk set E / scale."""

    def __init__(self, f: Interpolant, scale: float = 1.0):
        self.f = f
        self.scale = float(scale)
        self.domain = PLANE

    @property
    def dimension(self) -> int:
        return self.f.dimension

    def jet(self, z) -> HJet:
        h = self.f.jet(np.asarray(z, dtype=complex) / self.scale)
        return HJet(h.values, h.derivs / self.scale, h.log_scale, h.mag)


def solution_quality(problem: InterpProblem, state: InterpState, region, grid, scale: float = 1.0) -> dict:
    """Residual, grid estimate of sup f^# over ``region`` and C = K sup f^#.

    ``scale`` is the factor returned by :func:`solve_normalized` when the
    state solves the shrunk problem; the default 1 means the direct one.
    """
    from .curves import sphderiv_from_jet

    U = q_reflection(problem.n)
    E = validate_sparse(problem.E.points / scale)
    f = Interpolant(E, state.assignment, U)
    g = ScaledInterpolant(f, scale)
    sup = maximize_on_region(lambda z: sphderiv_from_jet(g.jet(z)), region, grid)
    K = problem.E.K
    h = g.jet(problem.E.points)
    res = fs_distance_many(h.values.T, np.array(problem.targets))
    return {
        "max_residual": float(np.max(res)),
        "sup_sphderiv": sup.value,
        "argmax": sup.point,
        "C": K * sup.value if math.isfinite(K) else None,
        "phi_tail_max": f.phi_max,
        "scale": scale,
        "lower_bound": True,
    }


def interpolant(problem: InterpProblem, state: InterpState) -> Interpolant:
    return Interpolant(problem.E, state.assignment, q_reflection(problem.n))


def phi_lipschitz_check(problem: InterpProblem, pairs) -> dict:
    """Check ||phi_m(a') - phi_m(a'')|| <= 1600 K^-4 ||a' - a''||_inf for sampled
    assignment pairs (a', a''), every m in E."""
    U = q_reflection(problem.n)
    bound = 1600 * problem.E.K ** -4 if math.isfinite(problem.E.K) else 0.0
    worst = 0.0
    bad = 0
    for a1, a2 in pairs:
        da = max(float(np.linalg.norm(x.zeta - y.zeta)) for x, y in zip(a1, a2))
        diff = np.linalg.norm(_tail_at_points(problem, a1, U) - _tail_at_points(problem, a2, U), axis=0)
        obs = float(np.max(diff)) if diff.size else 0.0
        if da > 0 and bound > 0:
            worst = max(worst, obs / (bound * da))
        if obs > bound * da * (1 + 1e-12) + 1e-15:
            bad += 1
    return {"bound": bound, "worst_ratio": worst, "violations": bad, "ok": bad == 0}
