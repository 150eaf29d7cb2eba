"""Stable-ranking analysis for multi-attribute items under linear scoring.

A ranking of items scored by a non-negative linear function is *stable* when
a large fraction of the weight space (or of a caller-chosen region of
interest) produces it.  This package verifies the stability of a given
ranking, enumerates all ranking regions exactly in two dimensions, discovers
rankings in decreasing stability order in any dimension via a lazily built
hyperplane arrangement, and scales to large datasets and top-k queries with
Monte-Carlo sampling of the weight space.
"""

from stablerank.model import (
    AttrMeta,
    Dataset,
    InfeasibleRankingError,
    Item,
    Ranking,
    RegionOfInterest,
    StabilityEstimate,
    TopKResult,
    generate_synthetic,
    load_dataset,
    rank,
    top_k,
)

__all__ = [
    "AttrMeta",
    "Dataset",
    "InfeasibleRankingError",
    "Item",
    "Ranking",
    "RegionOfInterest",
    "StabilityEstimate",
    "TopKResult",
    "generate_synthetic",
    "load_dataset",
    "rank",
    "top_k",
]

__version__ = "0.1.0"
