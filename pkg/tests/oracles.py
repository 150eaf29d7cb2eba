"""Independent brute-force oracles used to confirm engine outputs.

Everything here recomputes answers from first principles (dense angle
grids, direct scoring) without touching the engines under test.
"""

from __future__ import annotations

import numpy as np

from stablerank.model import Dataset


def grid_ranking_fraction_2d(dataset: Dataset, order: tuple[str, ...], m: int = 1_000_000) -> float:
    """Fraction of a dense angle grid over [0, pi/2] producing ``order``.

    An angle produces the order when the scores along it are strictly
    decreasing in that order (angle ties have measure zero on the grid).
    """
    thetas = (np.arange(m) + 0.5) * (np.pi / 2) / m
    W = np.column_stack((np.cos(thetas), np.sin(thetas)))
    idx = [dataset.index_of(t) for t in order]
    scores = W @ dataset.X.T  # (m, n)
    ok = np.ones(m, dtype=bool)
    for a, b in zip(idx, idx[1:]):
        ok &= scores[:, a] > scores[:, b]
    return float(ok.mean())


def grid_topk_set_fraction_2d(dataset: Dataset, members: set[str], k: int, m: int = 1_000_000) -> float:
    """Fraction of a dense angle grid whose top-k score set equals ``members``."""
    thetas = (np.arange(m) + 0.5) * (np.pi / 2) / m
    W = np.column_stack((np.cos(thetas), np.sin(thetas)))
    scores = W @ dataset.X.T
    top = np.argsort(-scores, axis=1, kind="stable")[:, :k]
    want = np.sort([dataset.index_of(t) for t in members])
    hits = (np.sort(top, axis=1) == want[None, :]).all(axis=1)
    return float(hits.mean())


def brute_rank(dataset: Dataset, w) -> tuple[str, ...]:
    """Order ids by score descending, id ascending on ties (pure Python)."""
    scores = dataset.X @ np.asarray(w, dtype=float)
    return tuple(
        t for t, _ in sorted(zip(dataset.ids, scores), key=lambda p: (-p[1], p[0]))
    )


def pearson_pairwise(X: np.ndarray) -> list[float]:
    """Pearson correlation of every attribute pair."""
    r = np.corrcoef(X.T)
    d = X.shape[1]
    return [float(r[i, j]) for i in range(d) for j in range(i + 1, d)]
