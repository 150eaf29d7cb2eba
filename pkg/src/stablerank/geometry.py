"""Dual-space geometry: dominance, ordering exchanges, polar coordinates,
rotations, and region-of-interest bounds.

A weight vector is a ray from the origin; the set of rays scoring two items
equally is the pair's *ordering exchange* (an angle in 2D, a hyperplane in
general), and crossing it swaps the pair's order in the ranking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linprog

from stablerank.model import RegionOfInterest

EPS_GEOM = 1e-9
"""Relative tolerance for on-boundary and angle-equality decisions."""


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """The ordering-exchange hyperplane  sum_k coeffs[k] * x_k = 0 of an item
    pair; weight vectors on its + side rank ``pair[0]`` above ``pair[1]``."""

    coeffs: NDArray[np.float64]
    pair: tuple[str, str]

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if not (coeffs != 0).any():
            raise ValueError("hyperplane coefficients must not all be zero")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def side(self, W: NDArray[np.float64]) -> NDArray[np.float64]:
        """Signed evaluation coeffs . w for weight rows W."""
        return np.asarray(W) @ self.coeffs


@dataclass(frozen=True)
class HalfSpace:
    """One side of a hyperplane: membership is sign * (coeffs . w) > 0."""

    plane: Hyperplane
    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (-1, 1):
            raise ValueError("sign must be -1 or +1")

    @property
    def signed_coeffs(self) -> NDArray[np.float64]:
        return self.sign * self.plane.coeffs

    def contains(self, W: NDArray[np.float64]) -> NDArray[np.bool_]:
        return self.sign * self.plane.side(W) > 0


@dataclass(frozen=True)
class AngleInterval:
    """A closed angle range [lo, hi] inside the 2D quadrant [0, pi/2]."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ValueError(f"interval bounds out of order: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def dominates(t: Sequence[float], t_other: Sequence[float]) -> bool:
    """True iff t is >= everywhere and > somewhere, forcing t above t_other
    under every strictly positive weighting."""
    a = np.asarray(t, dtype=np.float64)
    b = np.asarray(t_other, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("items must share one dimension")
    return bool((a >= b).all() and (a > b).any())


def exchange_angle_2d(t: Sequence[float], t_other: Sequence[float]) -> float | None:
    """The angle in (0, pi/2) where the two 2D items swap order, or None when
    one dominates the other (or the items are identical)."""
    a = np.asarray(t, dtype=np.float64)
    b = np.asarray(t_other, dtype=np.float64)
    if a.shape != (2,) or b.shape != (2,):
        raise ValueError("exchange_angle_2d needs 2-attribute items")
    num = b[0] - a[0]
    den = a[1] - b[1]
    if num == 0 and den == 0:
        return None
    if dominates(a, b) or dominates(b, a):
        return None
    return float(np.arctan(num / den))


def exchange_hyperplane(
    t_i: Sequence[float], t_j: Sequence[float], pair: tuple[str, str] = ("i", "j")
) -> Hyperplane | None:
    """The exchange hyperplane of an item pair, or None when no weighting in
    the open quadrant can swap them (dominance or identical items)."""
    a = np.asarray(t_i, dtype=np.float64)
    b = np.asarray(t_j, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("items must share one dimension")
    diff = a - b
    if not (diff != 0).any():
        return None
    if dominates(a, b) or dominates(b, a):
        return None
    return Hyperplane(diff, pair)


def to_polar(w: Sequence[float]) -> NDArray[np.float64]:
    """Polar angles (d-1 of them) of a nonzero vector.

    In 2D the single angle is measured from the first axis; for d >= 3 the
    last angle is measured from the d-th axis and the remaining angles locate
    the projection recursively, so ``to_cartesian(1, to_polar(w))`` is w
    normalized.
    """
    v = np.asarray(w, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("vector must be 1-dimensional with d >= 2")
    if not (v != 0).any():
        raise ValueError("zero vector has no direction")
    d = v.size
    theta = np.empty(d - 1, dtype=np.float64)
    for j in range(d - 1, 1, -1):
        rem = float(np.linalg.norm(v[:j]))
        theta[j - 1] = np.arctan2(rem, v[j])
    theta[0] = np.arctan2(v[1], v[0])
    return theta


def to_cartesian(r: float, theta: Sequence[float]) -> NDArray[np.float64]:
    """The point at radius r with polar angles theta (see ``to_polar``)."""
    ang = np.asarray(theta, dtype=np.float64)
    if ang.ndim != 1 or ang.size < 1:
        raise ValueError("theta must hold d-1 >= 1 angles")
    d = ang.size + 1
    out = np.empty(d, dtype=np.float64)
    radius = float(r)
    for j in range(d - 1, 1, -1):
        out[j] = radius * np.cos(ang[j - 1])
        radius = radius * np.sin(ang[j - 1])
    out[0] = radius * np.cos(ang[0])
    out[1] = radius * np.sin(ang[0])
    return out


def _givens(d: int, plane_axis: int, angle: float) -> NDArray[np.float64]:
    """Counterclockwise rotation by ``angle`` in the (x1, x_{plane_axis+1})
    coordinate plane (0-indexed axes 0 and plane_axis)."""
    g = np.eye(d)
    c, s = np.cos(angle), np.sin(angle)
    g[0, 0] = c
    g[0, plane_axis] = -s
    g[plane_axis, 0] = s
    g[plane_axis, plane_axis] = c
    return g


def rotation_matrix(rho: Sequence[float], d: int | None = None) -> NDArray[np.float64]:
    """Orthogonal matrix carrying the d-th axis onto the ray with polar
    angles rho, composed of plane rotations through the first axis."""
    ang = np.asarray(rho, dtype=np.float64)
    if d is None:
        d = ang.size + 1
    if ang.size != d - 1:
        raise ValueError(f"need {d - 1} angles for dimension {d}, got {ang.size}")
    if d == 2:
        return _givens(2, 1, ang[0] - np.pi / 2)
    R = _givens(d, d - 1, -ang[d - 2])
    for i in range(d - 3, 0, -1):
        R = _givens(d, i + 1, np.pi / 2 - ang[i]) @ R
    return _givens(d, 1, ang[0]) @ R


def rotate(w: Sequence[float], rho: Sequence[float]) -> NDArray[np.float64]:
    """Apply the ``rotation_matrix`` of rho to w (norm-preserving)."""
    v = np.asarray(w, dtype=np.float64)
    return rotation_matrix(rho, v.size) @ v


def angle_between(u: Sequence[float], v: Sequence[float]) -> float:
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0:
        raise ValueError("zero vector has no direction")
    return float(np.arccos(np.clip(a @ b / denom, -1.0, 1.0)))


def roi_to_angle_interval_2d(roi: RegionOfInterest) -> AngleInterval:
    """The tightest angle interval inside [0, pi/2] covering a 2D region of
    interest; raises ValueError when the feasible interval is empty."""
    quad = np.pi / 2
    if roi.kind == "full":
        return AngleInterval(0.0, quad)
    if roi.kind == "cone":
        ray = np.asarray(roi.ray, dtype=np.float64)
        if ray.size != 2:
            raise ValueError("2D interval needs a 2D cone ray")
        center = float(np.arctan2(ray[1], ray[0]))
        return AngleInterval(max(0.0, center - roi.max_angle), min(quad, center + roi.max_angle))
    lo, hi = 0.0, quad
    for con in roi.constraints:
        a = np.asarray(con.coeffs, dtype=np.float64)
        if a.size != 2:
            raise ValueError("2D interval needs 2D constraints")
        wants_nonneg = con.relation in (">=", ">")
        g0, g1 = a[0], a[1]  # g(theta) = g0 cos + g1 sin; signs at the endpoints
        if not wants_nonneg:
            g0, g1 = -g0, -g1
        if g0 >= 0 and g1 >= 0:
            continue  # feasible on the whole quadrant
        if g0 <= 0 and g1 <= 0:
            lo, hi = quad, 0.0  # infeasible everywhere (up to measure zero)
            break
        root = float(np.arctan2(-g0, g1)) if g1 > 0 else float(np.arctan(g0 / -g1))
        if g0 > 0:  # feasible from 0 up to the sign change
            hi = min(hi, root)
        else:  # feasible from the sign change up to pi/2
            lo = max(lo, root)
    if not lo < hi:
        raise ValueError("region of interest meets the quadrant in an empty angle interval")
    return AngleInterval(lo, hi)


def interior_point(roi: RegionOfInterest, d: int) -> NDArray[np.float64]:
    """A unit vector strictly inside roi and the open positive quadrant.

    Solves a small LP maximizing the worst slack over the quadrant facets and
    the constraints; raises ValueError when the region has empty interior.
    """
    if roi.kind == "full":
        return np.full(d, 1.0 / np.sqrt(d))
    if roi.kind == "cone":
        ray = np.asarray(roi.ray, dtype=np.float64)
        v = ray / np.linalg.norm(ray)
        if (v > 0).all():
            return v
        # Nudge an on-boundary ray toward the diagonal to get strict positivity.
        diag = np.full(d, 1.0 / np.sqrt(d))
        shift = min(0.5, roi.max_angle / np.pi)
        v = (1 - shift) * v + shift * diag
        return v / np.linalg.norm(v)
    rows = []
    for con in roi.constraints:
        a = np.asarray(con.coeffs, dtype=np.float64)
        a = a / np.linalg.norm(a)
        rows.append(-a if con.relation in (">=", ">") else a)
    m = len(rows)
    # Variables (w_1..w_d, delta): maximize delta subject to
    # w_i >= delta, (feasible-side row) . w >= delta, sum w = 1.
    a_ub = np.zeros((d + m, d + 1))
    a_ub[:d, :d] = -np.eye(d)
    a_ub[d:, :d] = np.asarray(rows)
    a_ub[:, d] = 1.0
    a_eq = np.zeros((1, d + 1))
    a_eq[0, :d] = 1.0
    c = np.zeros(d + 1)
    c[d] = -1.0
    bounds = [(0.0, 1.0)] * d + [(-1.0, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(d + m), A_eq=a_eq, b_eq=[1.0], bounds=bounds)
    if not res.success or res.x[d] <= 1e-10:
        raise ValueError(
            "constraint region has empty interior inside the positive quadrant"
        )
    w = res.x[:d]
    return w / np.linalg.norm(w)


def roi_contains(
    roi: RegionOfInterest, W: NDArray[np.float64], tol: float = EPS_GEOM
) -> NDArray[np.bool_]:
    """Vectorized membership of weight rows W (shape (..., d)) in roi."""
    W = np.asarray(W, dtype=np.float64)
    single = W.ndim == 1
    rows = W[None, :] if single else W
    ok = (rows >= -tol).all(axis=1)
    if roi.kind == "cone":
        ray = np.asarray(roi.ray, dtype=np.float64)
        ray = ray / np.linalg.norm(ray)
        norms = np.linalg.norm(rows, axis=1)
        cosang = np.divide(rows @ ray, norms, out=np.zeros_like(norms), where=norms > 0)
        ok &= cosang >= np.cos(min(roi.max_angle + tol, np.pi))
    elif roi.kind == "constraints":
        for con in roi.constraints:
            scale = float(np.linalg.norm(con.coeffs))
            ok &= con.satisfied(rows, tol * scale)
    return bool(ok[0]) if single else ok


def _extreme_rays(roi: RegionOfInterest, d: int) -> list[NDArray[np.float64]]:
    """Extreme rays of the polyhedral cone roi-and-quadrant, found as null
    directions of every (d-1)-subset of facet normals."""
    from itertools import combinations

    normals = [np.eye(d)[i] for i in range(d)]
    for con in roi.constraints:
        a = np.asarray(con.coeffs, dtype=np.float64)
        a = a / np.linalg.norm(a)
        normals.append(a if con.relation in (">=", ">") else -a)
    N = np.asarray(normals)
    rays: list[NDArray[np.float64]] = []
    for subset in combinations(range(len(normals)), d - 1):
        sub = N[list(subset)]
        _, s, vt = np.linalg.svd(sub)
        if s[-1] <= 1e-10:
            continue  # rank-deficient subset: nullspace is not a single ray
        null = vt[-1]
        for v in (null, -null):
            if (N @ v >= -1e-9).all() and np.linalg.norm(v) > 0.5:
                u = v / np.linalg.norm(v)
                if not any(u @ r > 1 - 1e-9 for r in rays):
                    rays.append(u)
    return rays


def bounding_cap(roi: RegionOfInterest, d: int) -> tuple[NDArray[np.float64], float]:
    """A (ray, max_angle) cap containing roi, for cap sampling plus rejection.

    Caps with half-angle <= pi/2 are closed under conic combinations, so a
    cap around the mean of the region's extreme rays that covers each of them
    covers the whole region.  Containment is the contract; minimality is not.
    """
    if roi.kind == "cone":
        ray = np.asarray(roi.ray, dtype=np.float64)
        return ray / np.linalg.norm(ray), float(roi.max_angle)
    if roi.kind == "full":
        return np.full(d, 1.0 / np.sqrt(d)), float(np.arccos(1.0 / np.sqrt(d)))
    rays = _extreme_rays(roi, d)
    if not rays:
        raise ValueError("constraint region has no extreme rays; is it empty?")
    center = np.mean(rays, axis=0)
    norm = np.linalg.norm(center)
    if norm < 1e-12:
        raise ValueError("degenerate constraint region")
    center = center / norm
    spread = max(angle_between(center, r) for r in rays)
    return center, float(min(np.pi / 2, spread + 1e-9))
