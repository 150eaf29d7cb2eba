"""Monte-Carlo get-next over full rankings and top-k results.

Uniform weight samples from the region of interest are aggregated into a
hash of result keys (full ranking, top-k set, or top-k ranked prefix); each
call returns the most frequent key not yet returned, with its frequency as
the stability estimate and a normal-theory confidence error.  A fixed-budget
variant draws N samples per call; a fixed-error variant keeps drawing until
the current best key's confidence error reaches a target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from numpy.typing import NDArray
from scipy.stats import norm

from stablerank.model import (
    Dataset,
    Ranking,
    RegionOfInterest,
    StabilityEstimate,
    TopKResult,
)
from stablerank.sampler import RngStream, sample_roi

MODES = ("full", "topk_set", "topk_ranked")

DEFAULT_SAMPLE_CAP = 10_000_000
"""Per-call safety cap for the fixed-error variant."""

Key = tuple[str, ...]


class SampleBudgetExceededError(RuntimeError):
    """The fixed-error loop hit its sample cap before reaching the target.

    Carries the mutated state (all draws are retained), the number of
    samples drawn this call, and the best candidate's running estimate.
    """

    def __init__(
        self,
        message: str,
        state: "MonteCarloState",
        drawn: int,
        best: tuple[Key, StabilityEstimate] | None,
    ):
        super().__init__(message)
        self.state = state
        self.drawn = drawn
        self.best = best


def confidence_error(m: float, n: int, alpha: float = 0.05) -> float:
    """Half-width of the normal-theory (1 - alpha) interval for a frequency
    m out of n samples: Z(1 - alpha/2) * sqrt(m (1 - m) / n)."""
    if not 0 <= m <= 1:
        raise ValueError("m must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    z = norm.ppf(1 - alpha / 2)
    return float(z * np.sqrt(m * (1 - m) / n))


def _stopping_error(count: int, n: int, z: float) -> float:
    """Conservative half-width used by the fixed-error stopping rule.

    The normal-theory half-width collapses to zero whenever the observed
    frequency is exactly 0 or 1 (e.g. after a single sample), which would
    stop the loop immediately regardless of the target.  The score-interval
    half-width stays positive at the extremes; taking the larger of the two
    keeps the reported normal-theory error at or below the target whenever
    the rule fires.
    """
    m = count / n
    wald = z * np.sqrt(m * (1 - m) / n)
    wilson = z / (n + z * z) * np.sqrt(count * (n - count) / n + z * z / 4)
    return float(max(wald, wilson))


def expected_samples_to_observe(stability: float) -> tuple[float, float]:
    """Mean and variance of the number of uniform samples until a region of
    volume fraction S is first hit (geometrically distributed): 1/S and
    (1 - S)/S^2."""
    if not 0 < stability <= 1:
        raise ValueError("stability must lie in (0, 1]")
    return 1.0 / stability, (1.0 - stability) / stability**2


@dataclass
class MonteCarloState:
    """Aggregated sample counts and the set of already-returned keys."""

    mode: str
    k: int | None
    rng: RngStream
    counts: dict[Key, int] = field(default_factory=dict)
    weight_sums: dict[Key, NDArray[np.float64]] = field(default_factory=dict)
    n_total: int = 0
    returned: list[Key] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "full":
            if self.k is not None:
                raise ValueError("mode 'full' takes no k")
        elif self.k is None or self.k < 1:
            raise ValueError(f"mode {self.mode!r} needs k >= 1")


def init_mc_state(mode: str = "full", k: int | None = None, seed: int = 0,
                  rng: RngStream | None = None) -> MonteCarloState:
    return MonteCarloState(mode=mode, k=k, rng=rng or RngStream(seed))


@dataclass(frozen=True)
class McResult:
    """One returned key with its stability estimate and mean weight vector."""

    key: Key
    mode: str
    k: int | None
    estimate: StabilityEstimate
    weights: tuple[float, ...]
    samples_used: int

    @property
    def stability(self) -> float:
        return self.estimate.value

    @property
    def ranking(self) -> Ranking:
        if self.mode != "full":
            raise ValueError("only mode 'full' results hold a full ranking")
        return Ranking(self.key)

    @property
    def topk(self) -> TopKResult:
        if self.mode == "full":
            raise ValueError("mode 'full' results hold a full ranking, not a top-k")
        return TopKResult("set" if self.mode == "topk_set" else "ranked", self.k, self.key)


def _topk_indices(scores: NDArray[np.float64], k: int, id_rank: NDArray[np.int64]) -> NDArray[np.int64]:
    """Indices of the k best items for one score row, matching ``rank``'s
    exact semantics (score descending, id ascending on ties)."""
    n = scores.size
    if k >= n:
        return np.lexsort((id_rank, -scores))[:k]
    part = np.argpartition(-scores, k - 1)[:k]
    kth = scores[part].min()
    better = np.flatnonzero(scores > kth)
    need = k - better.size
    tied = np.flatnonzero(scores == kth)
    tied = tied[np.argsort(id_rank[tied], kind="stable")][:need]
    return np.concatenate((better, tied))


def _keys_for_batch(dataset: Dataset, W: NDArray[np.float64], mode: str, k: int | None) -> list[Key]:
    """The result key of every sample row in W."""
    ids = np.asarray(dataset.ids, dtype=object)
    id_rank = dataset.id_rank
    scores = W @ dataset.X.T
    keys: list[Key] = []
    if mode == "full":
        for row in scores:
            order = np.lexsort((id_rank, -row))
            keys.append(tuple(ids[order]))
        return keys
    assert k is not None
    for row in scores:
        idx = _topk_indices(row, k, id_rank)
        if mode == "topk_set":
            keys.append(tuple(sorted(ids[idx])))
        else:
            ordered = idx[np.lexsort((id_rank[idx], -row[idx]))]
            keys.append(tuple(ids[ordered]))
    return keys


def _batch_size(n_items: int) -> int:
    return max(16, min(4096, (1 << 22) // max(1, n_items)))


def _ingest(state: MonteCarloState, dataset: Dataset, W: NDArray[np.float64], keys: Iterable[Key]) -> None:
    counts = state.counts
    sums = state.weight_sums
    for w_row, key in zip(W, keys):
        if key in counts:
            counts[key] += 1
            sums[key] += w_row
        else:
            counts[key] = 1
            sums[key] = w_row.copy()
    state.n_total += W.shape[0]


def _best_candidate(state: MonteCarloState) -> Key | None:
    """Most frequent key not yet returned; count ties break toward the
    canonically smallest key."""
    best: Key | None = None
    best_count = -1
    returned = set(state.returned)
    for key, count in state.counts.items():
        if key in returned:
            continue
        if count > best_count or (count == best_count and (best is None or key < best)):
            best = key
            best_count = count
    return best


def _result_for(state: MonteCarloState, key: Key, alpha: float, samples_used: int) -> McResult:
    value = state.counts[key] / state.n_total
    estimate = StabilityEstimate(
        value, confidence_error(value, state.n_total, alpha), 1 - alpha, state.n_total
    )
    mean_w = state.weight_sums[key] / state.counts[key]
    mean_w = mean_w / np.linalg.norm(mean_w)
    return McResult(
        key=key,
        mode=state.mode,
        k=state.k,
        estimate=estimate,
        weights=tuple(float(x) for x in mean_w),
        samples_used=samples_used,
    )


def get_next_fixed_budget(
    state: MonteCarloState,
    dataset: Dataset,
    roi: RegionOfInterest | None = None,
    budget: int = 10_000,
    alpha: float = 0.05,
) -> McResult | None:
    """Draw exactly ``budget`` new samples, then return the most frequent
    not-yet-returned key (stability = count / all samples ever drawn), or
    None when everything observed was already returned."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    roi = roi or RegionOfInterest.full()
    chunk = _batch_size(dataset.n)
    remaining = budget
    while remaining > 0:
        take = min(chunk, remaining)
        W = np.atleast_2d(sample_roi(roi, dataset.d, state.rng, size=take))
        _ingest(state, dataset, W, _keys_for_batch(dataset, W, state.mode, state.k))
        remaining -= take
    best = _best_candidate(state)
    if best is None:
        return None
    state.returned.append(best)
    return _result_for(state, best, alpha, budget)


def get_next_fixed_error(
    state: MonteCarloState,
    dataset: Dataset,
    roi: RegionOfInterest | None = None,
    e_target: float = 0.01,
    alpha: float = 0.05,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> McResult:
    """Keep sampling until the best not-yet-returned key's confidence error
    is at most ``e_target``; the stopping rule is re-checked after every
    sample.  Raises ``SampleBudgetExceededError`` (carrying the partial
    state) if ``sample_cap`` draws do not reach the target.
    """
    if e_target <= 0:
        raise ValueError("e_target must be positive")
    roi = roi or RegionOfInterest.full()
    z = float(norm.ppf(1 - alpha / 2))

    best = _best_candidate(state)
    best_count = state.counts.get(best, 0) if best is not None else 0
    returned = set(state.returned)
    drawn = 0

    def target_met() -> bool:
        if best is None or state.n_total == 0:
            return False
        return _stopping_error(best_count, state.n_total, z) <= e_target

    while not target_met():
        if drawn >= sample_cap:
            estimate = None
            if best is not None:
                value = best_count / state.n_total
                estimate = (
                    best,
                    StabilityEstimate(
                        value,
                        confidence_error(value, state.n_total, alpha),
                        1 - alpha,
                        state.n_total,
                    ),
                )
            raise SampleBudgetExceededError(
                f"confidence error target {e_target} unreached after {drawn} samples",
                state,
                drawn,
                estimate,
            )
        take = min(64, sample_cap - drawn)
        W = np.atleast_2d(sample_roi(roi, dataset.d, state.rng, size=take))
        keys = _keys_for_batch(dataset, W, state.mode, state.k)
        for row_idx, key in enumerate(keys):
            _ingest(state, dataset, W[row_idx : row_idx + 1], [key])
            drawn += 1
            if key not in returned:
                count = state.counts[key]
                if best is None or count > best_count or (count == best_count and key < best):
                    best, best_count = key, count
            if target_met():
                break

    assert best is not None
    state.returned.append(best)
    return _result_for(state, best, alpha, drawn)
