"""Grid maximisation with local refinement.

Used for sup f^# estimates and the rescaling argmax. Results are lower bounds
on the true supremum: the grid only sees what it samples.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SupResult:
    value: float
    point: complex
    evaluations: int
    lower_bound: bool = True

    def to_json(self) -> dict:
        from .io import complex_to_json

        return {
            "sup": self.value,
            "argmax": complex_to_json(self.point),
            "evaluations": self.evaluations,
            "lower_bound": self.lower_bound,
        }


def _pick(values: np.ndarray, zs: np.ndarray) -> int:
    """Index of the maximum; near-ties go to smaller |z|, then smaller arg in [0, 2pi)."""
    vals = np.where(np.isfinite(values), values, -np.inf)
    top = vals.max()
    if not np.isfinite(top):
        return -1
    cand = np.flatnonzero(vals >= top - TIE_RTOL * max(abs(top), 1e-300))
    mod = np.abs(zs[cand])
    arg = np.mod(np.angle(zs[cand]), 2 * np.pi)
    arg = np.where(arg >= 2 * np.pi - 1e-15, 0.0, arg)
    # round the modulus so that floating noise does not override the arg rule
    order = np.lexsort((arg, np.round(mod, 12)))
    return int(cand[order[0]])


def grid_argmax(
    fun: Callable[[np.ndarray], np.ndarray],
    to_z: Callable[[np.ndarray, np.ndarray], np.ndarray],
    u_range: tuple[float, float],
    v_range: tuple[float, float],
    n_u: int,
    n_v: int,
    rounds: int = 2,
    zoom: int = 10,
    v_periodic: bool = False,
    u_endpoint: bool = True,
) -> SupResult:
    """Maximise ``fun(to_z(u, v))`` on a (u, v) grid, then zoom in ``rounds`` times.

    Each refinement round lays a grid ``zoom`` times finer over the cell
    neighbourhood of the current best point.
    """
    u0, u1 = u_range
    v0, v1 = v_range
    us = np.linspace(u0, u1, n_u, endpoint=u_endpoint)
    vs = np.linspace(v0, v1, n_v, endpoint=not v_periodic)
    hu = (u1 - u0) / max(n_u - 1, 1)
    hv = (v1 - v0) / (n_v if v_periodic else max(n_v - 1, 1))

    U, V = np.meshgrid(us, vs, indexing="ij")
    Zs = to_z(U, V).ravel()
    vals = np.asarray(fun(Zs), dtype=float).ravel()
    count = vals.size
    k = _pick(vals, Zs)
    if k < 0:
        raise ValueError("objective is not finite anywhere on the grid")
    best_val, best_z = vals[k], Zs[k]
    best_u, best_v = U.ravel()[k], V.ravel()[k]

    for _ in range(rounds):
        m = 2 * zoom + 1
        lo_u = best_u - hu
        hi_u = best_u + hu
        if u_endpoint:
            lo_u, hi_u = max(lo_u, u0), min(hi_u, u1)
        else:
            lo_u, hi_u = max(lo_u, u0), min(hi_u, u1 - 1e-15 * max(1.0, abs(u1)))
        su = np.linspace(lo_u, hi_u, m)
        sv = np.linspace(best_v - hv, best_v + hv, m)
        if not v_periodic:
            sv = np.clip(sv, v0, v1)
        U2, V2 = np.meshgrid(su, sv, indexing="ij")
        Z2 = np.concatenate([to_z(U2, V2).ravel(), [best_z]])
        v2 = np.concatenate([np.asarray(fun(Z2[:-1]), dtype=float).ravel(), [best_val]])
        count += v2.size - 1
        k = _pick(v2, Z2)
        if k < v2.size - 1:
            best_val, best_z = v2[k], Z2[k]
            best_u, best_v = U2.ravel()[k], V2.ravel()[k]
        hu, hv = hu / zoom, hv / zoom
    return SupResult(float(best_val), complex(best_z), count)
