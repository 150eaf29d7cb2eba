"""Unbiased samplers over the weight space.

Directions are drawn uniformly from the positive quadrant of the unit
d-sphere, from a spherical cap around a reference ray (closed-form inverse
CDF in 3D, a Riemann-sum table otherwise), or from an arbitrary region of
interest via acceptance-rejection.  All draws are deterministic given an
``RngStream`` seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from stablerank.geometry import rotation_matrix, to_polar
from stablerank.model import RegionOfInterest

DEFAULT_GAMMA = 10_000
"""Default partition count for cap CDF tables."""

DEFAULT_TRIAL_CAP = 1_000_000
"""Rejection sampling gives up after this many proposals."""


class DegenerateRegionError(RuntimeError):
    """Rejection sampling exhausted its trial cap; the region of interest is
    empty or vanishingly small."""


@dataclass
class RngStream:
    """A splittable deterministic random stream.

    Identical (seed, path) pairs reproduce identical sample sequences;
    ``split(i)`` derives an independent child stream, so parallel consumers
    stay deterministic under any scheduling.
    """

    seed: int
    path: tuple[int, ...] = ()
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
            self._gen = np.random.Generator(np.random.PCG64(seq))
        return self._gen

    def split(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.path + (index,))


@dataclass(frozen=True, eq=False)
class CapCdfTable:
    """Riemann-sum table of the cap CDF F(x) = int_0^x sin^(d-2) / int_0^theta sin^(d-2).

    ``L[i]`` approximates F(i * eps) with right-endpoint sums over gamma equal
    partitions; ``integral`` keeps the unnormalized denominator for cost
    comparisons between sampling methods.
    """

    d: int
    theta: float
    gamma: int
    eps: float
    L: NDArray[np.float64]
    integral: float

    def invert(self, y: NDArray[np.float64] | float) -> NDArray[np.float64]:
        """Map uniform draws y in [0,1] to angles in [0, theta]; within a
        table cell the angle is interpolated uniformly."""
        ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
        if (ys < 0).any() or (ys > 1).any():
            raise ValueError("y must lie in [0, 1]")
        idx = np.clip(np.searchsorted(self.L, ys, side="right"), 1, self.gamma)
        lo = self.L[idx - 1]
        hi = self.L[idx]
        frac = (ys - lo) / (hi - lo)
        x = (idx - 1 + frac) * self.eps
        return x if np.ndim(y) else float(x[0])


def sample_u(d: int, rng: RngStream, size: int | None = None) -> NDArray[np.float64]:
    """Uniform directions on the positive quadrant of the unit d-sphere,
    via absolute normal deviates normalized to unit length."""
    if d < 2:
        raise ValueError("d must be >= 2")
    m = 1 if size is None else int(size)
    Z = np.abs(rng.gen.standard_normal((m, d)))
    W = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    return W[0] if size is None else W


def build_cap_cdf(d: int, theta: float, gamma: int = DEFAULT_GAMMA) -> CapCdfTable:
    """Tabulate the cap CDF for dimension d and cap angle theta with gamma
    partitions; the deviation from the exact CDF is O(1/gamma)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if not 0 < theta <= np.pi / 2:
        raise ValueError("theta must lie in (0, pi/2]")
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    eps = theta / gamma
    xs = np.arange(1, gamma + 1) * eps
    sums = np.cumsum(np.sin(xs) ** (d - 2) * eps)
    L = np.concatenate(([0.0], sums / sums[-1]))
    L.setflags(write=False)
    return CapCdfTable(d, float(theta), int(gamma), float(eps), L, float(sums[-1]))


@lru_cache(maxsize=64)
def _cached_cap_cdf(d: int, theta: float, gamma: int) -> CapCdfTable:
    return build_cap_cdf(d, theta, gamma)


def inverse_cdf_3d(y: NDArray[np.float64] | float, theta: float) -> NDArray[np.float64] | float:
    """Closed-form 3D cap CDF inverse: arccos(1 - (1 - cos theta) * y)."""
    ys = np.asarray(y, dtype=np.float64)
    if (ys < 0).any() or (ys > 1).any():
        raise ValueError("y must lie in [0, 1]")
    if not 0 < theta <= np.pi / 2:
        raise ValueError("theta must lie in (0, pi/2]")
    x = np.arccos(1.0 - (1.0 - np.cos(theta)) * ys)
    return float(x) if np.ndim(y) == 0 else x


def _cap_angles(
    m: int, d: int, theta: float, rng: RngStream, table: CapCdfTable | None
) -> NDArray[np.float64]:
    """Polar distances from the cap axis for m draws."""
    y = rng.gen.random(m)
    if d == 2:
        return theta * y  # sin^0 integrand: the CDF is linear
    if table is not None:
        return table.invert(y)
    if d == 3:
        return np.asarray(inverse_cdf_3d(y, theta))
    raise ValueError("d > 3 cap sampling needs a CDF table (see build_cap_cdf)")


def sample_cap(
    rho: Sequence[float],
    theta: float,
    d: int,
    rng: RngStream,
    table: CapCdfTable | None = None,
    size: int | None = None,
) -> NDArray[np.float64]:
    """Uniform directions within angle theta of the ray rho, restricted to
    the positive quadrant (out-of-quadrant draws are rejected and redrawn).

    ``rho`` is the axis as polar angles (d-1 values) or a cartesian ray
    (d values).  Each draw picks a polar distance x from the axis by CDF
    inversion and an independent uniform point on the (d-1)-sphere for the
    remaining angles; the assembled point is rotated so the cap axis lands
    on rho.
    """
    if not 0 < theta <= np.pi / 2 + 1e-12:
        raise ValueError("theta must lie in (0, pi/2]")
    rho_arr = np.asarray(rho, dtype=np.float64)
    if rho_arr.size == d:
        rho_arr = to_polar(rho_arr)
    if rho_arr.size != d - 1:
        raise ValueError(f"rho must hold {d - 1} angles or a {d}-vector ray")
    m = 1 if size is None else int(size)
    R = rotation_matrix(rho_arr, d)
    out = np.empty((m, d))
    filled = 0
    rounds = 0
    gen = rng.gen
    while filled < m:
        want = m - filled
        x = _cap_angles(want, d, theta, rng, table)
        if d == 2:
            side = np.where(gen.random(want) < 0.5, -1.0, 1.0)
            phi = rho_arr[0] + side * x
            W = np.column_stack((np.cos(phi), np.sin(phi)))
        else:
            Z = gen.standard_normal((want, d - 1))
            circle = Z / np.linalg.norm(Z, axis=1, keepdims=True)
            W = np.column_stack((np.sin(x)[:, None] * circle, np.cos(x)))
            W = W @ R.T
        keep = (W >= -1e-12).all(axis=1)
        kept = np.clip(W[keep], 0.0, None)
        take = kept[: m - filled]
        out[filled : filled + take.shape[0]] = take
        filled += take.shape[0]
        rounds += 1
        if rounds > 10_000 and filled == 0:
            raise DegenerateRegionError(
                "cap sampling found no point inside the positive quadrant"
            )
    norms = np.linalg.norm(out, axis=1, keepdims=True)
    out = out / norms
    return out[0] if size is None else out


def sample_rejection(
    roi: RegionOfInterest,
    d: int,
    rng: RngStream,
    size: int | None = None,
    trial_cap: int = DEFAULT_TRIAL_CAP,
) -> NDArray[np.float64]:
    """Uniform directions inside roi by acceptance-rejection over the whole
    quadrant; expected proposals per sample are 1/p for a region occupying
    volume fraction p."""
    from stablerank.geometry import roi_contains

    m = 1 if size is None else int(size)
    out = np.empty((m, d))
    filled = 0
    proposals = 0
    while filled < m:
        want = max(64, m - filled)
        W = sample_u(d, rng, size=want)
        proposals += want
        keep = W[roi_contains(roi, W)]
        take = keep[: m - filled]
        out[filled : filled + take.shape[0]] = take
        filled += take.shape[0]
        if filled < m and proposals >= trial_cap:
            raise DegenerateRegionError(
                f"no acceptance within {proposals} proposals; "
                "the region of interest is degenerate"
            )
    return out[0] if size is None else out


def choose_method(d: int, theta: float, gamma: int = DEFAULT_GAMMA) -> str:
    """Pick between 'inverse_cdf' and 'rejection' for cap sampling.

    Rejection wins when building/searching a gamma-cell table costs more
    than the expected redraws, i.e. when log(gamma) exceeds the reciprocal
    of the unnormalized cap integral.  The closed-form 2D/3D inverses are
    constant-cost and always preferred.
    """
    if d <= 3:
        return "inverse_cdf"
    integral = _cached_cap_cdf(d, float(theta), int(gamma)).integral
    return "rejection" if np.log(gamma) > 1.0 / integral else "inverse_cdf"


def sample_roi(
    roi: RegionOfInterest,
    d: int,
    rng: RngStream,
    size: int | None = None,
    gamma: int = DEFAULT_GAMMA,
    trial_cap: int = DEFAULT_TRIAL_CAP,
) -> NDArray[np.float64]:
    """Uniform directions inside an arbitrary region of interest.

    Cones are cap-sampled directly (table-based when the cost rule prefers
    it); constraint regions are cap-sampled inside their bounding cap and
    rejected against the constraints; the full quadrant falls through to
    ``sample_u``.
    """
    from stablerank.geometry import bounding_cap, roi_contains

    if roi.kind == "full":
        return sample_u(d, rng, size=size)
    if roi.kind == "cone":
        ray = np.asarray(roi.ray, dtype=np.float64)
        theta = float(roi.max_angle)
        if choose_method(d, theta, gamma) == "rejection":
            return sample_rejection(roi, d, rng, size=size, trial_cap=trial_cap)
        table = _cached_cap_cdf(d, theta, gamma) if d > 3 else None
        return sample_cap(ray, theta, d, rng, table=table, size=size)

    ray, theta = bounding_cap(roi, d)
    table = _cached_cap_cdf(d, float(theta), gamma) if d > 3 else None
    m = 1 if size is None else int(size)
    out = np.empty((m, d))
    filled = 0
    proposals = 0
    while filled < m:
        want = max(64, m - filled)
        W = np.atleast_2d(sample_cap(ray, theta, d, rng, table=table, size=want))
        proposals += want
        keep = W[roi_contains(roi, W)]
        take = keep[: m - filled]
        out[filled : filled + take.shape[0]] = take
        filled += take.shape[0]
        if filled < m and proposals >= trial_cap:
            raise DegenerateRegionError(
                f"no acceptance within {proposals} proposals; "
                "the region of interest is degenerate"
            )
    return out[0] if size is None else out
