"""d-dimensional ranking regions via a lazily built hyperplane arrangement.

Every non-dominated item pair contributes an exchange hyperplane; the cells
of their arrangement inside the region of interest are exactly the ranking
regions.  Building the whole arrangement is hopeless (it can have O(n^(2d))
cells), so regions are split lazily, best-first: a shared store of uniform
samples doubles as the stability estimate (window size / store size) and as
the intersection test (a hyperplane splits a region when its window has
samples on both sides), and only the currently most stable region is ever
refined.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linprog

from stablerank.geometry import HalfSpace, Hyperplane, dominates, exchange_hyperplane
from stablerank.model import (
    Dataset,
    InfeasibleRankingError,
    Ranking,
    RegionOfInterest,
    StabilityEstimate,
    rank,
)
from stablerank.randomized import confidence_error
from stablerank.sampler import RngStream, sample_roi

_BLOCK = 128  # hyperplanes scanned per matrix product while advancing a region


@dataclass
class SampleStore:
    """Uniform weight samples whose row order is repartitioned in place.

    The multiset of rows never changes; regions reference contiguous
    [sb, se] windows, so partitioning a parent's window prepares both
    children's windows simultaneously.
    """

    W: NDArray[np.float64]

    def __post_init__(self) -> None:
        self.W = np.ascontiguousarray(np.asarray(self.W, dtype=np.float64))
        if self.W.ndim != 2 or self.W.shape[0] < 1:
            raise ValueError("sample store needs at least one sample row")

    @property
    def size(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def partition(self, sb: int, se: int, negative: NDArray[np.bool_]) -> int:
        """Reorder rows sb..se so flagged (negative-side) rows come first,
        preserving relative order; returns the index of the last flagged row."""
        window = self.W[sb : se + 1]
        order = np.argsort(~negative, kind="stable")
        self.W[sb : se + 1] = window[order]
        return sb + int(negative.sum()) - 1


@dataclass(frozen=True)
class ExchangeSet:
    """The exchange hyperplanes that pass through the region of interest,
    in deterministic (pair-id lexicographic) order."""

    planes: tuple[Hyperplane, ...]

    def __len__(self) -> int:
        return len(self.planes)

    @property
    def matrix(self) -> NDArray[np.float64]:
        try:
            return self._matrix  # type: ignore[attr-defined]
        except AttributeError:
            mat = (
                np.stack([p.coeffs for p in self.planes])
                if self.planes
                else np.empty((0, 0))
            )
            mat.setflags(write=False)
            object.__setattr__(self, "_matrix", mat)
            return mat


@dataclass
class Region:
    """A (partially refined) ranking region.

    ``halfspaces`` are the sides chosen at each split so far; ``pending`` is
    the next hyperplane index to test; [sb, se] is the region's sample
    window (empty when se < sb); ``stability`` is window size over store
    size.  ``seq`` breaks stability ties by creation order.
    """

    halfspaces: tuple[HalfSpace, ...]
    stability: float
    pending: int
    sb: int
    se: int
    seq: int

    @property
    def window_size(self) -> int:
        return max(0, self.se - self.sb + 1)


@dataclass(frozen=True)
class MdVerifyResult:
    constraints: tuple[HalfSpace, ...]
    estimate: StabilityEstimate


@dataclass(frozen=True)
class MdResult:
    """One discovered region: its ranking, stability estimate, region record,
    and the representative weight vector used to rank."""

    ranking: Ranking
    estimate: StabilityEstimate
    region: Region
    weights: tuple[float, ...]

    @property
    def stability(self) -> float:
        return self.estimate.value


@dataclass
class MdState:
    """Everything a best-first arrangement session owns: the dataset, the
    sample store, the exchange set, and the max-stability region heap."""

    dataset: Dataset
    roi: RegionOfInterest
    store: SampleStore
    exchanges: ExchangeSet
    alpha: float = 0.05
    exact_fallback: bool = False
    _heap: list[tuple[float, int, Region]] = field(default_factory=list)
    _seq: int = 0

    def push(self, region: Region) -> None:
        heapq.heappush(self._heap, (-region.stability, region.seq, region))

    def pop(self) -> Region | None:
        if not self._heap:
            return None
        return heapq.heappop(self._heap)[2]

    def next_seq(self) -> int:
        self._seq += 1
        return self._seq

    @property
    def heap_size(self) -> int:
        return len(self._heap)


def _ranking_halfspaces(dataset: Dataset, ranking: Ranking) -> tuple[HalfSpace, ...]:
    """The positive half-space of each adjacent pair without dominance;
    raises InfeasibleRankingError when some pair's order is unachievable."""
    if len(ranking.order) != dataset.n or set(ranking.order) != set(dataset.ids):
        raise ValueError("ranking must be a permutation of the dataset ids")
    X = dataset.X
    out: list[HalfSpace] = []
    for a_id, b_id in zip(ranking.order, ranking.order[1:]):
        a = X[dataset.index_of(a_id)]
        b = X[dataset.index_of(b_id)]
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
        plane = exchange_hyperplane(a, b, (a_id, b_id))
        assert plane is not None
        out.append(HalfSpace(plane, +1))
    return tuple(out)


def stability_oracle(
    constraints: Sequence[HalfSpace],
    store: SampleStore,
    window: tuple[int, int] | None = None,
    alpha: float = 0.05,
) -> StabilityEstimate:
    """Monte-Carlo stability: the fraction of store samples satisfying every
    half-space (or simply the window fraction for a partitioned region)."""
    n = store.size
    if window is not None:
        sb, se = window
        count = max(0, se - sb + 1)
    elif not constraints:
        count = n
    else:
        mask = np.ones(n, dtype=bool)
        for hs in constraints:
            mask &= hs.plane.side(store.W) * hs.sign > 0
        count = int(mask.sum())
    value = count / n
    return StabilityEstimate(value, confidence_error(value, n, alpha), 1 - alpha, n)


def verify_md(
    dataset: Dataset,
    ranking: Ranking,
    roi: RegionOfInterest | None = None,
    store: SampleStore | NDArray[np.float64] | None = None,
    n_samples: int = 100_000,
    seed: int = 0,
    alpha: float = 0.05,
) -> MdVerifyResult:
    """Stability of a ranking in any dimension.

    The ranking's region is the open cone where every adjacent pair keeps
    its order; its volume fraction is estimated on a sample store drawn
    uniformly from the region of interest (pass one in to reuse samples).
    """
    roi = roi or RegionOfInterest.full()
    if store is None:
        store = SampleStore(
            sample_roi(roi, dataset.d, RngStream(seed), size=n_samples)
        )
    elif not isinstance(store, SampleStore):
        store = SampleStore(store)
    constraints = _ranking_halfspaces(dataset, ranking)
    return MdVerifyResult(constraints, stability_oracle(constraints, store, alpha=alpha))


def _intersects_roi_exactly(
    coeffs: NDArray[np.float64], roi: RegionOfInterest, d: int
) -> bool:
    """Whether a hyperplane meets the region of interest (superset-safe)."""
    if roi.kind == "full":
        return True  # mixed-sign coefficients always cross the open quadrant
    if roi.kind == "cone":
        ray = np.asarray(roi.ray, dtype=np.float64)
        ray = ray / np.linalg.norm(ray)
        normal = coeffs / np.linalg.norm(coeffs)
        # The cap center's angular distance to the great circle of the
        # hyperplane; a conservative (never-excluding) cap test.
        return abs(float(normal @ ray)) < np.sin(min(roi.max_angle + 1e-12, np.pi / 2))
    rows = [coeffs / np.linalg.norm(coeffs)]
    a_eq = np.zeros((2, d))
    a_eq[0] = rows[0]
    a_eq[1] = 1.0
    a_ub = []
    for con in roi.constraints:
        a = np.asarray(con.coeffs, dtype=np.float64)
        a = a / np.linalg.norm(a)
        a_ub.append(-a if con.relation in (">=", ">") else a)
    res = linprog(
        np.zeros(d),
        A_ub=np.asarray(a_ub) if a_ub else None,
        b_ub=np.zeros(len(a_ub)) if a_ub else None,
        A_eq=a_eq,
        b_eq=[0.0, 1.0],
        bounds=[(0.0, 1.0)] * d,
    )
    return bool(res.success)


def exchange_hyperplanes(
    dataset: Dataset, roi: RegionOfInterest | None, store: SampleStore
) -> ExchangeSet:
    """All exchange hyperplanes crossing the region of interest.

    A hyperplane with store samples strictly on both sides certainly
    crosses; one-sided evidence falls back to an exact test so no crossing
    hyperplane is ever dropped (extra ones are harmless: they simply never
    split anything).
    """
    roi = roi or RegionOfInterest.full()
    X = dataset.X
    ids = dataset.ids
    n, d = X.shape
    candidates: list[Hyperplane] = []
    for i in range(n):
        for j in range(i + 1, n):
            pair = (ids[i], ids[j]) if ids[i] <= ids[j] else (ids[j], ids[i])
            a = X[dataset.index_of(pair[0])]
            b = X[dataset.index_of(pair[1])]
            plane = exchange_hyperplane(a, b, pair)
            if plane is not None:
                candidates.append(plane)
    candidates.sort(key=lambda p: p.pair)
    if roi.kind == "full":
        return ExchangeSet(tuple(candidates))
    kept: list[Hyperplane] = []
    W = store.W
    for block_start in range(0, len(candidates), _BLOCK):
        block = candidates[block_start : block_start + _BLOCK]
        D = W @ np.stack([p.coeffs for p in block]).T
        has_neg = (D < 0).any(axis=0)
        has_pos = (D > 0).any(axis=0)
        for offset, plane in enumerate(block):
            if has_neg[offset] and has_pos[offset]:
                kept.append(plane)
            elif _intersects_roi_exactly(plane.coeffs, roi, d):
                kept.append(plane)
    return ExchangeSet(tuple(kept))


def init_md_state(
    dataset: Dataset,
    roi: RegionOfInterest | None = None,
    n_samples: int = 100_000,
    seed: int = 0,
    rng: RngStream | None = None,
    alpha: float = 0.05,
    exact_fallback: bool = False,
) -> MdState:
    """Draw the sample store, collect the exchange set, and seed the heap
    with the root region covering the whole region of interest."""
    roi = roi or RegionOfInterest.full()
    if exact_fallback and roi.kind == "cone":
        raise ValueError(
            "exact_fallback needs a linearly described region of interest "
            "(full or constraints), not a cone"
        )
    rng = rng or RngStream(seed)
    store = SampleStore(sample_roi(roi, dataset.d, rng, size=n_samples))
    exchanges = exchange_hyperplanes(dataset, roi, store)
    state = MdState(
        dataset=dataset,
        roi=roi,
        store=store,
        exchanges=exchanges,
        alpha=alpha,
        exact_fallback=exact_fallback,
    )
    root = Region(
        halfspaces=(),
        stability=1.0,
        pending=0,
        sb=0,
        se=store.size - 1,
        seq=0,
    )
    state.push(root)
    return state


def pass_through(h: Hyperplane, region: Region, store: SampleStore) -> int | None:
    """Partition the region's sample window around h.

    Negative-side rows move to the front; returns the split index i (the last
    negative row), or None when every sample lies on one side (the window is
    left untouched).
    """
    if region.window_size == 0:
        return None
    dots = store.W[region.sb : region.se + 1] @ h.coeffs
    negative = dots < 0
    count = int(negative.sum())
    if count == 0 or count == region.window_size:
        return None
    return store.partition(region.sb, region.se, negative)


def _roi_rows(roi: RegionOfInterest) -> list[NDArray[np.float64]]:
    rows = []
    for con in roi.constraints:
        a = np.asarray(con.coeffs, dtype=np.float64)
        a = a / np.linalg.norm(a)
        rows.append(a if con.relation in (">=", ">") else -a)
    return rows


def _interior_of(rows: Sequence[NDArray[np.float64]], d: int) -> NDArray[np.float64] | None:
    """Max-slack interior point of {w >= 0, row . w >= 0 for each row} on the
    simplex, or None when the system has empty interior."""
    m = len(rows)
    a_ub = np.zeros((d + m, d + 1))
    a_ub[:d, :d] = -np.eye(d)
    for i, row in enumerate(rows):
        a_ub[d + i, :d] = -row / np.linalg.norm(row)
    a_ub[:, d] = 1.0
    a_eq = np.zeros((1, d + 1))
    a_eq[0, :d] = 1.0
    c = np.zeros(d + 1)
    c[d] = -1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(d + m),
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0.0, 1.0)] * d + [(-1.0, 1.0)],
    )
    if not res.success or res.x[d] <= 1e-10:
        return None
    w = res.x[:d]
    return w / np.linalg.norm(w)


def _region_rows(state: MdState, region: Region) -> list[NDArray[np.float64]]:
    return _roi_rows(state.roi) + [hs.signed_coeffs for hs in region.halfspaces]


def _split(state: MdState, region: Region, h_idx: int, negative: NDArray[np.bool_]) -> None:
    """Split a region at hyperplane ``h_idx`` and push both children."""
    plane = state.exchanges.planes[h_idx]
    count = int(negative.sum())
    size = region.window_size
    if 0 < count < size:
        i = state.store.partition(region.sb, region.se, negative)
    elif count == size:
        i = region.se
    else:
        i = region.sb - 1
    total = state.store.size
    for sign, sb, se in ((-1, region.sb, i), (+1, i + 1, region.se)):
        child = Region(
            halfspaces=region.halfspaces + (HalfSpace(plane, sign),),
            stability=max(0, se - sb + 1) / total,
            pending=h_idx + 1,
            sb=sb,
            se=se,
            seq=state.next_seq(),
        )
        if child.window_size > 0 or state.exact_fallback:
            state.push(child)


def _advance(state: MdState, region: Region) -> Region | None:
    """Process the region's pending hyperplanes until it splits (children are
    pushed, returns None) or becomes a leaf (returned)."""
    planes = state.exchanges.planes
    total = len(planes)
    store = state.store
    d = store.d
    while region.pending < total:
        window = store.W[region.sb : region.se + 1]
        size = window.shape[0]
        block_end = min(region.pending + _BLOCK, total)
        idxs = range(region.pending, block_end)
        if size:
            D = window @ state.exchanges.matrix[region.pending : block_end].T
            neg = D < 0
            counts = neg.sum(axis=0)
        for offset, h_idx in enumerate(idxs):
            if size:
                count = int(counts[offset])
                if 0 < count < size:
                    _split(state, region, h_idx, neg[:, offset])
                    return None
            if state.exact_fallback:
                # One-sided or empty window: decide the crossing exactly.
                rows = _region_rows(state, region)
                coeffs = planes[h_idx].coeffs
                sides_feasible = []
                for sign in (-1, +1):
                    if size and (count > 0) == (sign == -1):
                        sides_feasible.append(True)  # samples witness this side
                    else:
                        sides_feasible.append(
                            _interior_of(rows + [sign * coeffs], d) is not None
                        )
                if all(sides_feasible):
                    _split(
                        state,
                        region,
                        h_idx,
                        np.ones(size, dtype=bool) if size and count else np.zeros(size, dtype=bool),
                    )
                    return None
            region.pending = h_idx + 1
    return region


def _leaf_result(state: MdState, region: Region) -> MdResult | None:
    store = state.store
    if region.window_size > 0:
        mean = store.W[region.sb : region.se + 1].mean(axis=0)
        w = mean / np.linalg.norm(mean)
    else:
        w = _interior_of(_region_rows(state, region), store.d)
        if w is None:
            return None  # region pinched to measure zero; nothing to report
    value = region.window_size / store.size
    estimate = StabilityEstimate(
        value, confidence_error(value, store.size, state.alpha), 1 - state.alpha, store.size
    )
    return MdResult(
        ranking=rank(state.dataset, w),
        estimate=estimate,
        region=region,
        weights=tuple(float(x) for x in w),
    )


def get_next_md(state: MdState, dataset: Dataset | None = None) -> MdResult | None:
    """The next most stable undiscovered ranking region, or None when the
    arrangement inside the region of interest is exhausted.

    Pops the most stable region, advances it past non-crossing hyperplanes,
    splits it at the first crossing one (both children re-enter the heap),
    and returns once the popped region has no hyperplane left to test.
    Splits only ever refine the current best region, so stabilities are
    non-increasing across calls and no ranking repeats.
    """
    if dataset is not None and dataset is not state.dataset:
        raise ValueError("state was initialized for a different dataset")
    while True:
        region = state.pop()
        if region is None:
            return None
        leaf = _advance(state, region)
        if leaf is None:
            continue
        result = _leaf_result(state, leaf)
        if result is not None:
            return result
