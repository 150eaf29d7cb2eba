"""Exact two-dimensional machinery.

In 2D every weight direction is a single angle in [0, pi/2] and every item
pair swaps order at most once, so the quadrant splits into finitely many
angle intervals, each producing one ranking.  This module verifies a
ranking's interval directly, enumerates all intervals by sweeping a ray
across the quadrant, and replays them in decreasing-stability order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numpy.typing import NDArray

from stablerank.geometry import (
    EPS_GEOM,
    AngleInterval,
    dominates,
    exchange_angle_2d,
    roi_to_angle_interval_2d,
)
from stablerank.model import Dataset, InfeasibleRankingError, Ranking, RegionOfInterest, rank

QUADRANT = AngleInterval(0.0, float(np.pi / 2))


@dataclass(frozen=True)
class Verify2dResult:
    """Exact region and stability of one ranking.

    ``stability`` is normalized by the queried interval's width;
    ``stability_quadrant`` by the full quadrant (the two agree when no
    region of interest is given).
    """

    interval: AngleInterval
    stability: float
    stability_quadrant: float


@dataclass(frozen=True)
class Region2dResult:
    """One enumerated ranking region: ranking, stability, interval, and the
    representative weight vector used to rank."""

    ranking: Ranking
    stability: float
    interval: AngleInterval
    weights: tuple[float, float]


@dataclass
class RegionHeap:
    """All ranking regions of a 2D dataset inside an angle interval, ordered
    most-stable first.

    The regions are the gaps between consecutive exchange angles; they tile
    the interval exactly, so their stabilities sum to 1.  ``pop`` replays
    them by decreasing width (ties by lower bound).
    """

    interval: AngleInterval
    boundaries: NDArray[np.float64]
    _order: NDArray[np.int64] = field(repr=False)
    _cursor: int = 0

    @property
    def region_count(self) -> int:
        return self.boundaries.size - 1

    @property
    def remaining(self) -> int:
        return self.region_count - self._cursor

    def __len__(self) -> int:
        return self.remaining

    def pop(self) -> tuple[float, AngleInterval] | None:
        """The next most stable (stability, interval) pair, or None."""
        if self._cursor >= self._order.size:
            return None
        idx = int(self._order[self._cursor])
        self._cursor += 1
        lo = float(self.boundaries[idx])
        hi = float(self.boundaries[idx + 1])
        return (hi - lo) / self.interval.width, AngleInterval(lo, hi)


def _as_interval(roi: RegionOfInterest | AngleInterval | None) -> AngleInterval:
    if roi is None:
        return QUADRANT
    if isinstance(roi, AngleInterval):
        return roi
    return roi_to_angle_interval_2d(roi)


def _check_permutation(dataset: Dataset, ranking: Ranking) -> list[int]:
    if len(ranking.order) != dataset.n or set(ranking.order) != set(dataset.ids):
        raise ValueError("ranking must be a permutation of the dataset ids")
    return [dataset.index_of(i) for i in ranking.order]


def verify_2d(
    dataset: Dataset,
    ranking: Ranking,
    roi: RegionOfInterest | AngleInterval | None = None,
) -> Verify2dResult:
    """Exact stability of a ranking on a 2D dataset.

    Walks the adjacent pairs, tightening the angle interval at each pair's
    exchange angle: the lower bound rises when the higher-placed item wins on
    the first attribute being small, the upper bound falls when it wins on
    the first attribute being large.  Raises ``InfeasibleRankingError`` when
    a pair's order is unachievable inside the queried interval.
    """
    if dataset.d != 2:
        raise ValueError("verify_2d needs a 2-attribute dataset")
    idx = _check_permutation(dataset, ranking)
    interval = _as_interval(roi)
    lo, hi = interval.lo, interval.hi
    X = dataset.X
    for a_pos, b_pos in zip(idx, idx[1:]):
        a, b = X[a_pos], X[b_pos]
        a_id, b_id = dataset.ids[a_pos], dataset.ids[b_pos]
        if (a == b).all():
            if a_id > b_id:
                raise InfeasibleRankingError(
                    f"items {a_id!r} and {b_id!r} are identical; ties order by id",
                    pair=(a_id, b_id),
                )
            continue
        if dominates(b, a):
            raise InfeasibleRankingError(
                f"{b_id!r} dominates {a_id!r} but is ranked below it",
                pair=(a_id, b_id),
            )
        if dominates(a, b):
            continue
        theta = exchange_angle_2d(a, b)
        assert theta is not None
        if a[0] < b[0]:
            lo = max(lo, theta)
        else:
            hi = min(hi, theta)
        if lo > hi:
            raise InfeasibleRankingError(
                f"ordering {a_id!r} above {b_id!r} leaves no feasible angle "
                "inside the region of interest",
                pair=(a_id, b_id),
            )
    width = hi - lo
    return Verify2dResult(
        interval=AngleInterval(lo, hi),
        stability=width / interval.width,
        stability_quadrant=width / QUADRANT.width,
    )


def _pair_exchange_angles(X: NDArray[np.float64]) -> NDArray[np.float64]:
    """Exchange angles of every non-dominated item pair (vectorized)."""
    n = X.shape[0]
    chunks = []
    x1, x2 = X[:, 0], X[:, 1]
    for i in range(n - 1):
        num = x1[i + 1 :] - x1[i]
        den = x2[i] - x2[i + 1 :]
        valid = num * den > 0
        if valid.any():
            chunks.append(np.arctan(num[valid] / den[valid]))
    if not chunks:
        return np.empty(0)
    return np.concatenate(chunks)


def ray_sweep(
    dataset: Dataset, interval: AngleInterval | RegionOfInterest | None = None
) -> RegionHeap:
    """Enumerate every ranking region inside the interval.

    Collects the exchange angles of all non-dominated pairs, keeps those
    strictly inside the interval, and cuts the interval at each distinct one
    (angles closer than ``EPS_GEOM`` collapse into a single cut, so no
    zero-width region is emitted).  The resulting regions tile the interval.
    """
    if dataset.d != 2:
        raise ValueError("ray_sweep needs a 2-attribute dataset")
    iv = _as_interval(interval)
    angles = _pair_exchange_angles(dataset.X)
    angles = angles[(angles > iv.lo + EPS_GEOM) & (angles < iv.hi - EPS_GEOM)]
    angles = np.sort(angles)
    if angles.size:
        keep = np.concatenate(([True], np.diff(angles) > EPS_GEOM))
        angles = angles[keep]
    boundaries = np.concatenate(([iv.lo], angles, [iv.hi]))
    widths = np.diff(boundaries)
    order = np.lexsort((boundaries[:-1], -widths))
    return RegionHeap(interval=iv, boundaries=boundaries, _order=order)


def get_next_2d(heap: RegionHeap, dataset: Dataset) -> Region2dResult | None:
    """The next most stable region's ranking, or None once exhausted.

    Ranks at the popped interval's midpoint direction
    (cos((lo+hi)/2), sin((lo+hi)/2)); distinct regions produce distinct
    rankings, so the h-th call yields the h-th most stable ranking.
    """
    popped = heap.pop()
    if popped is None:
        return None
    stability, iv = popped
    mid = iv.midpoint
    w = (float(np.cos(mid)), float(np.sin(mid)))
    return Region2dResult(
        ranking=rank(dataset, w), stability=stability, interval=iv, weights=w
    )


def iter_regions(heap: RegionHeap, dataset: Dataset) -> Iterator[Region2dResult]:
    """Drain the heap as an iterator of ``Region2dResult``."""
    while True:
        result = get_next_2d(heap, dataset)
        if result is None:
            return
        yield result
