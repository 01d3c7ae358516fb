"""Fubini-Study geometry on complex projective space.

Points of P^n are carried as complex numpy vectors of length n+1 (homogeneous
coordinates). Every function here is invariant under rescaling those vectors
by a nonzero complex number.

The sheet space V = B(2) x {0..n} is represented by :class:`VPoint`; W is the
part of V with small chart coordinates.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .config import TOLERANCES

#: Radius of the local-inverse ball and of the surrogate-addition domain.
BRANCH_DELTA = 1.0 / 11.0
#: Lipschitz constant of the local inverse of the sheet map.
BRANCH_LIP = 5.0


class InvalidPointError(ValueError):
    """Homogeneous coordinates are all zero (or not finite)."""


class ChartDomainError(ValueError):
    """Chart coordinates fall outside the ball B(2)."""


class BranchError(ValueError):
    """A local inverse was requested outside its guaranteed domain."""


class NonUnitaryError(ValueError):
    pass


class BranchAmbiguityWarning(RuntimeWarning):
    """|w_0|/||w|| lies close to the threshold separating the two branches of p_add."""


def as_point(p) -> np.ndarray:
    """Validate homogeneous coordinates and return them as a complex vector."""
    v = np.asarray(p, dtype=complex).reshape(-1)
    if v.size < 2:
        raise InvalidPointError(f"need at least 2 homogeneous coordinates, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise InvalidPointError("homogeneous coordinates must be finite")
    if np.linalg.norm(v) == 0.0:
        raise InvalidPointError("all homogeneous coordinates vanish")
    return v


def normalize(p) -> np.ndarray:
    """Unit-norm representative with the largest coordinate real and positive."""
    v = as_point(p)
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def same_point(p, q, tol: float = 1e-12) -> bool:
    return fs_distance(p, q) <= tol


def fs_distance(p, q) -> float:
    """Fubini-Study distance: the angle between the complex lines through p and q.

    Values lie in [0, pi/2].
    """
    u, v = as_point(p), as_point(q)
    if u.size != v.size:
        raise InvalidPointError("points live in projective spaces of different dimension")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    u, v = u / nu, v / nv
    c = abs(np.vdot(u, v))
    # arccos is ill-conditioned near c = 1; use the sine of the angle there
    if c > 0.9:
        # average both projections so that d(p, q) == d(q, p) bit for bit
        ip = np.vdot(u, v)
        s = 0.5 * (np.linalg.norm(v - ip * u) + np.linalg.norm(u - np.conj(ip) * v))
        return float(np.arcsin(min(s, 1.0)))
    return float(np.arccos(min(c, 1.0)))


def fs_distance_many(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Row-wise distances for stacked homogeneous vectors of shape (..., n+1)."""
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    P = P / np.linalg.norm(P, axis=-1, keepdims=True)
    Q = Q / np.linalg.norm(Q, axis=-1, keepdims=True)
    inner = np.sum(np.conj(P) * Q, axis=-1)
    c = np.abs(inner)
    s = 0.5 * (np.linalg.norm(Q - inner[..., None] * P, axis=-1) + np.linalg.norm(P - np.conj(inner)[..., None] * Q, axis=-1))
    return np.where(c > 0.9, np.arcsin(np.minimum(s, 1.0)), np.arccos(np.minimum(c, 1.0)))


# --- charts -----------------------------------------------------------------


def chart_psi(zeta) -> np.ndarray:
    """Standard chart B(2) -> P^n, zeta -> (1 : zeta_1 : ... : zeta_n)."""
    z = np.asarray(zeta, dtype=complex).reshape(-1)
    if np.linalg.norm(z) >= 2.0:
        raise ChartDomainError(f"chart point has norm {np.linalg.norm(z):.6g} >= 2")
    return np.concatenate([[1.0 + 0j], z])


def chart_psi_inv(p, check: bool = True) -> np.ndarray:
    """Inverse of :func:`chart_psi`: zeta_j = p_j / p_0."""
    v = as_point(p)
    if v[0] == 0:
        raise ChartDomainError("point lies on the hyperplane p_0 = 0")
    zeta = v[1:] / v[0]
    if check and np.linalg.norm(zeta) >= 2.0:
        raise ChartDomainError(f"chart image has norm {np.linalg.norm(zeta):.6g} >= 2")
    return zeta


def coord_swap(p, j: int) -> np.ndarray:
    """Automorphism exchanging homogeneous coordinates 0 and j (1 <= j <= n)."""
    v = as_point(p).copy()
    n = v.size - 1
    if not 1 <= j <= n:
        raise IndexError(f"sheet index {j} outside 1..{n}")
    v[0], v[j] = v[j], v[0]
    return v


def _swap(v: np.ndarray, j: int) -> np.ndarray:
    # unchecked swap on the last axis; j = 0 is the identity
    if j == 0:
        return v
    out = np.array(v, copy=True)
    out[..., [0, j]] = out[..., [j, 0]]
    return out


# --- sheet space V -----------------------------------------------------------


@dataclass(frozen=True)
class VPoint:
    """Point (zeta; sheet) of V = B(2) x {0, ..., n}."""

    zeta: np.ndarray
    sheet: int

    def __post_init__(self):
        z = np.asarray(self.zeta, dtype=complex).reshape(-1)
        object.__setattr__(self, "zeta", z)
        if not 0 <= self.sheet <= z.size:
            raise IndexError(f"sheet {self.sheet} outside 0..{z.size}")
        if np.linalg.norm(z) >= 2.0:
            raise ChartDomainError(f"V point has chart norm {np.linalg.norm(z):.6g} >= 2")

    @property
    def n(self) -> int:
        return self.zeta.size

    def in_w(self) -> bool:
        """Membership in W, using the max-norm (see :func:`big_psi_inv`)."""
        return bool(np.max(np.abs(self.zeta), initial=0.0) <= 1.0 + 1e-15)

    def to_json(self) -> dict:
        from .io import complex_list_to_json

        return {"zeta": complex_list_to_json(self.zeta), "sheet": int(self.sheet)}

    @classmethod
    def from_json(cls, obj) -> "VPoint":
        from .io import complex_list_from_json

        return cls(np.array(complex_list_from_json(obj["zeta"])), int(obj["sheet"]))


def v_distance(a: VPoint, b: VPoint) -> float:
    """Distance in V; points on different sheets are infinitely far apart."""
    if a.sheet != b.sheet:
        return float("inf")
    return float(np.linalg.norm(a.zeta - b.zeta))


def big_psi(a: VPoint) -> np.ndarray:
    """Sheet map V -> P^n: chart on sheet 0, then the swap p_j."""
    return _swap(np.concatenate([[1.0 + 0j], a.zeta]), a.sheet)


def big_psi_inv(p) -> VPoint:
    """Right inverse of :func:`big_psi` landing in W.

    The sheet is the index of a coordinate of maximal modulus (smallest such
    index on ties); the remaining coordinates are divided by it, so every chart
    coordinate has modulus at most 1.
    """
    v = as_point(p)
    mod = np.abs(v)
    j = int(np.flatnonzero(mod >= mod.max() * (1 - 1e-15))[0])
    w = _swap(v, j)
    return VPoint(w[1:] / w[0], j)


def big_psi_local_inv(p, anchor: VPoint, check: bool = True) -> VPoint:
    """Branch of the inverse of :func:`big_psi` on the sheet of ``anchor``.

    Defined on the Fubini-Study ball of radius 1/11 about ``big_psi(anchor)``,
    where it is 5-Lipschitz.
    """
    v = as_point(p)
    if check:
        d = fs_distance(v, big_psi(anchor))
        if d >= BRANCH_DELTA:
            raise BranchError(f"point at distance {d:.6g} >= 1/11 from the anchor image")
    w = _swap(v, anchor.sheet)
    if w[0] == 0:
        raise BranchError("point lies outside the anchor's chart")
    zeta = w[1:] / w[0]
    if np.linalg.norm(zeta) >= 2.0:
        raise BranchError(f"local inverse leaves B(2): chart norm {np.linalg.norm(zeta):.6g}")
    return VPoint(zeta, anchor.sheet)


# --- surrogate addition ------------------------------------------------------


def p_add(w, zeta, tol_w0: float | None = None) -> np.ndarray:
    """Surrogate addition P(w, zeta) on P^n x B(1/11).

    With w scaled so that w_0 = 1 the result is (1 : w_1 + zeta_1 : ... ); points
    with w_0 = 0 are returned unchanged. The branch is chosen by comparing
    |w_0|/||w|| against ``tol_w0``.
    """
    tol_w0 = TOLERANCES.p_add_w0 if tol_w0 is None else tol_w0
    v = as_point(w)
    z = np.asarray(zeta, dtype=complex).reshape(-1)
    if z.size != v.size - 1:
        raise ValueError("zeta must have n entries")
    ratio = abs(v[0]) / np.linalg.norm(v)
    if tol_w0 / 2 < ratio < 2 * tol_w0:
        warnings.warn(
            f"|w_0|/||w|| = {ratio:.3g} is within a factor 2 of the branch threshold",
            BranchAmbiguityWarning,
            stacklevel=2,
        )
    if ratio < tol_w0:
        return v.copy()
    return np.concatenate([[1.0 + 0j], v[1:] / v[0] + z])


# --- unitary automorphisms ---------------------------------------------------


@dataclass(frozen=True)
class UnitaryMap:
    matrix: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.matrix, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise NonUnitaryError("unitary map needs a square matrix")
        err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
        if err > TOLERANCES.unitarity:
            raise NonUnitaryError(f"U*U deviates from I by {err:.3g}")
        object.__setattr__(self, "matrix", U)

    @property
    def inverse(self) -> "UnitaryMap":
        return UnitaryMap(self.matrix.conj().T)

    def __call__(self, p) -> np.ndarray:
        return apply_unitary(self, p)


def apply_unitary(U: UnitaryMap, p) -> np.ndarray:
    v = as_point(p)
    if v.size != U.matrix.shape[0]:
        raise ValueError("dimension mismatch between map and point")
    return U.matrix @ v


def householder_exchange(u, v) -> UnitaryMap:
    """Householder reflection swapping the unit vectors u/|u| and v/|v|.

    Both inputs must have real, nonnegative inner product after normalisation
    for the reflection to map one exactly onto the other; that is the case for
    the uses in this package (real vectors).
    """
    u = as_point(u)
    v = as_point(v)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    w = u - v
    if np.linalg.norm(w) < 1e-15:
        return UnitaryMap(np.eye(u.size, dtype=complex))
    w = w / np.linalg.norm(w)
    return UnitaryMap(np.eye(u.size, dtype=complex) - 2.0 * np.outer(w, w.conj()))


def q_reflection(n: int) -> UnitaryMap:
    """The fixed automorphism exchanging (1:1:...:1) and (1:0:...:0) in P^n."""
    e0 = np.zeros(n + 1, dtype=complex)
    e0[0] = 1.0
    return householder_exchange(np.ones(n + 1), e0)
