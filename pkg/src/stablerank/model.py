"""Items, datasets, rankings, regions of interest, and synthetic data.

Items carry d scoring attributes normalized to [0, 1]; a non-negative weight
vector w scores an item as the dot product of w with its attributes.  Ranking
sorts by score descending with ties broken by ascending item id, so every
weight vector induces exactly one ranking.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np
from numpy.typing import NDArray

DIRECTIONS = ("higher", "lower")
ROI_KINDS = ("full", "cone", "constraints")
RELATIONS = ("<=", "<", ">=", ">")


class DatasetParseError(ValueError):
    """A CSV cell could not be parsed; the message names the offending row."""


class DatasetValidationError(ValueError):
    """The parsed data violates a dataset invariant (duplicate id, d < 2, ...)."""


class InfeasibleRankingError(Exception):
    """No weight vector in the region of interest produces the ranking.

    ``pair`` names the adjacent (higher-placed, lower-placed) item ids whose
    required order cannot be achieved.
    """

    def __init__(self, message: str, pair: tuple[str, str] | None = None):
        super().__init__(message)
        self.pair = pair


@dataclass(frozen=True)
class AttrMeta:
    """Name, preferred direction, and raw value range of one attribute."""

    name: str
    direction: str = "higher"
    raw_min: float = 0.0
    raw_max: float = 1.0

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise DatasetValidationError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}"
            )


@dataclass(frozen=True)
class Item:
    """One item: a unique id and its d normalized scoring attributes."""

    id: str
    attrs: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Dataset:
    """n items with d normalized scoring attributes each.

    ``X`` is the n x d attribute matrix (row i belongs to ``ids[i]``); it is
    frozen after construction so datasets can be shared across threads.
    """

    ids: tuple[str, ...]
    X: NDArray[np.float64]
    attr_meta: tuple[AttrMeta, ...]

    def __post_init__(self) -> None:
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        if X.ndim != 2:
            raise DatasetValidationError("attribute matrix must be 2-dimensional")
        n, d = X.shape
        if n < 1:
            raise DatasetValidationError("dataset needs at least one item")
        if d < 2:
            raise DatasetValidationError(f"dataset needs at least 2 attributes, got {d}")
        if len(self.ids) != n:
            raise DatasetValidationError("ids and attribute rows disagree in length")
        if len(set(self.ids)) != n:
            seen: set[str] = set()
            dup = next(i for i in self.ids if i in seen or seen.add(i))  # type: ignore[func-returns-value]
            raise DatasetValidationError(f"duplicate item id {dup!r}")
        if len(self.attr_meta) != d:
            raise DatasetValidationError("attr_meta length must equal d")
        if not np.isfinite(X).all():
            raise DatasetValidationError("attributes must be finite")
        if X.min() < -1e-12 or X.max() > 1 + 1e-12:
            raise DatasetValidationError("attributes must lie in [0, 1]")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "ids", tuple(self.ids))
        # Rank of each row's id in ascending id order; the global tie-break key.
        id_rank = np.empty(n, dtype=np.int64)
        id_rank[np.argsort(np.asarray(self.ids))] = np.arange(n)
        id_rank.setflags(write=False)
        object.__setattr__(self, "_id_rank", id_rank)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def id_rank(self) -> NDArray[np.int64]:
        """Tie-break key: id_rank[i] is the position of ids[i] in sorted id order."""
        return self._id_rank  # type: ignore[attr-defined]

    @property
    def items(self) -> tuple[Item, ...]:
        return tuple(Item(i, tuple(row)) for i, row in zip(self.ids, self.X))

    def item(self, item_id: str) -> Item:
        idx = self.index_of(item_id)
        return Item(item_id, tuple(self.X[idx]))

    def index_of(self, item_id: str) -> int:
        try:
            return self._index[item_id]  # type: ignore[attr-defined]
        except AttributeError:
            object.__setattr__(self, "_index", {i: k for k, i in enumerate(self.ids)})
            return self._index[item_id]  # type: ignore[attr-defined]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, Sequence[float]]]) -> "Dataset":
        """Build a dataset from (id, attrs) pairs of already-normalized values."""
        pairs = list(pairs)
        if not pairs:
            raise DatasetValidationError("dataset needs at least one item")
        ids = tuple(str(i) for i, _ in pairs)
        X = np.asarray([list(a) for _, a in pairs], dtype=np.float64)
        meta = tuple(AttrMeta(f"a{j + 1}") for j in range(X.shape[1]))
        return cls(ids, X, meta)


@dataclass(frozen=True)
class Ranking:
    """A full ranking: item ids from highest to lowest score."""

    order: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[str]:
        return iter(self.order)

    def __getitem__(self, i: int) -> str:
        return self.order[i]


@dataclass(frozen=True)
class TopKResult:
    """The first k items of a ranking, as an ordered prefix or a canonical set.

    ``set`` mode sorts the members by id so equal sets compare (and hash)
    equal regardless of the weight vector that produced them.
    """

    mode: str
    k: int
    members: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.mode not in ("set", "ranked"):
            raise ValueError(f"mode must be 'set' or 'ranked', got {self.mode!r}")
        if len(self.members) != self.k:
            raise ValueError("members length must equal k")


@dataclass(frozen=True)
class Constraint:
    """A homogeneous linear inequality  coeffs . w  <relation>  0."""

    coeffs: tuple[float, ...]
    relation: str

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")
        if not any(c != 0 for c in self.coeffs):
            raise ValueError("constraint coefficients must not all be zero")

    def satisfied(self, W: NDArray[np.float64], tol: float = 0.0) -> NDArray[np.bool_]:
        """Vectorized membership test for weight rows W (shape ... x d)."""
        g = np.asarray(W) @ np.asarray(self.coeffs, dtype=np.float64)
        if self.relation == "<=":
            return g <= tol
        if self.relation == "<":
            return g < tol
        if self.relation == ">=":
            return g >= -tol
        return g > -tol


@dataclass(frozen=True)
class RegionOfInterest:
    """The acceptable part of the weight space.

    ``full``: the whole positive quadrant of the unit sphere.
    ``cone``: weight directions within ``max_angle`` of ``ray``.
    ``constraints``: directions satisfying homogeneous linear inequalities.
    """

    kind: str = "full"
    ray: tuple[float, ...] | None = None
    max_angle: float | None = None
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ROI_KINDS:
            raise ValueError(f"kind must be one of {ROI_KINDS}")
        if self.kind == "cone":
            ray = np.asarray(self.ray, dtype=np.float64)
            if ray.ndim != 1 or ray.size < 2:
                raise ValueError("cone ray must be a vector of dimension >= 2")
            if (ray < -1e-12).any() or not (ray > 0).any():
                raise ValueError("cone ray must be non-negative and nonzero")
            if self.max_angle is None or not 0 < self.max_angle <= np.pi / 2:
                raise ValueError("cone max_angle must lie in (0, pi/2]")
            object.__setattr__(self, "ray", tuple(float(x) for x in ray))
        elif self.kind == "constraints":
            if not self.constraints:
                raise ValueError("constraints roi needs at least one constraint")
            dims = {len(c.coeffs) for c in self.constraints}
            if len(dims) != 1:
                raise ValueError("constraints must share one dimension")

    @classmethod
    def full(cls) -> "RegionOfInterest":
        return cls(kind="full")

    @classmethod
    def cone(cls, ray: Sequence[float], max_angle: float) -> "RegionOfInterest":
        return cls(kind="cone", ray=tuple(float(x) for x in ray), max_angle=float(max_angle))

    @classmethod
    def from_constraints(
        cls, constraints: Iterable[Constraint | tuple[Sequence[float], str]]
    ) -> "RegionOfInterest":
        """Build a constraint region, validating that it has a strictly
        interior point inside the positive quadrant."""
        normalized = tuple(
            c if isinstance(c, Constraint) else Constraint(tuple(float(x) for x in c[0]), c[1])
            for c in constraints
        )
        roi = cls(kind="constraints", constraints=normalized)
        from stablerank.geometry import interior_point  # deferred: avoids import cycle

        interior_point(roi, len(normalized[0].coeffs))  # raises if empty
        return roi

    @property
    def dim(self) -> int | None:
        """The dimension the region pins down, or None for ``full``."""
        if self.kind == "cone":
            return len(self.ray)  # type: ignore[arg-type]
        if self.kind == "constraints":
            return len(self.constraints[0].coeffs)
        return None


@dataclass(frozen=True)
class StabilityEstimate:
    """A stability value with its sampling-confidence context.

    ``confidence_error`` is the half-width of the (1 - alpha) normal-theory
    interval around ``value``; exact engines report 0 with samples = 0.
    """

    value: float
    confidence_error: float
    confidence_level: float
    samples: int


def parse_attr_spec(spec: str) -> tuple[str, str]:
    """Parse 'name:higher' / 'name:lower' into (name, direction)."""
    name, sep, direction = spec.rpartition(":")
    if not sep or not name or direction not in DIRECTIONS:
        raise DatasetValidationError(
            f"attribute spec {spec!r} must look like NAME:higher or NAME:lower"
        )
    return name, direction


def load_dataset(
    source: str | os.PathLike[str] | IO[str],
    id_col: str,
    attrs: Sequence[str | tuple[str, str]],
    normalize: bool = True,
) -> Dataset:
    """Load a CSV file (path or open text handle) and min-max normalize it.

    ``attrs`` lists the scoring columns in order, each as (name, direction)
    or a 'name:higher'/'name:lower' string.  Higher-preferred values map to
    (v - min)/(max - min), lower-preferred to (max - v)/(max - min); a
    constant column maps to 0.5 everywhere.  With ``normalize=False`` the
    values are taken as already lying in [0, 1] (lower-preferred columns
    are flipped to 1 - v); out-of-range values are rejected.
    """
    schema = [parse_attr_spec(a) if isinstance(a, str) else (a[0], a[1]) for a in attrs]
    if len(schema) < 2:
        raise DatasetValidationError("need at least 2 scoring attributes")
    for _, direction in schema:
        if direction not in DIRECTIONS:
            raise DatasetValidationError(f"direction must be one of {DIRECTIONS}")

    if hasattr(source, "read"):
        handle: IO[str] = source  # type: ignore[assignment]
        rows = _read_csv(handle, id_col, schema)
    else:
        with open(source, "r", encoding="utf-8", newline="") as handle:
            rows = _read_csv(handle, id_col, schema)

    ids = tuple(r[0] for r in rows)
    if len(set(ids)) != len(ids):
        seen: set[str] = set()
        dup = next(i for i in ids if i in seen or seen.add(i))  # type: ignore[func-returns-value]
        raise DatasetValidationError(f"duplicate item id {dup!r}")

    raw = np.asarray([r[1] for r in rows], dtype=np.float64)
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = hi - lo
    X = np.empty_like(raw)
    meta = []
    for j, (name, direction) in enumerate(schema):
        if not normalize:
            if lo[j] < 0.0 or hi[j] > 1.0:
                raise DatasetValidationError(
                    f"column {name!r} has values outside [0, 1]; "
                    "normalization is disabled"
                )
            X[:, j] = raw[:, j] if direction == "higher" else 1.0 - raw[:, j]
        elif span[j] == 0:
            X[:, j] = 0.5
        elif direction == "higher":
            X[:, j] = (raw[:, j] - lo[j]) / span[j]
        else:
            X[:, j] = (hi[j] - raw[:, j]) / span[j]
        meta.append(AttrMeta(name, direction, float(lo[j]), float(hi[j])))
    return Dataset(ids, X, tuple(meta))


def _read_csv(
    handle: IO[str], id_col: str, schema: Sequence[tuple[str, str]]
) -> list[tuple[str, list[float]]]:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetParseError("empty CSV: missing header row") from None
    header = [h.strip() for h in header]
    try:
        id_idx = header.index(id_col)
        attr_idx = [header.index(name) for name, _ in schema]
    except ValueError as exc:
        raise DatasetParseError(f"column not found in header: {exc}") from None

    rows: list[tuple[str, list[float]]] = []
    for row_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < len(header):
            raise DatasetParseError(f"row {row_no}: expected {len(header)} cells, got {len(row)}")
        values = []
        for j, name_dir in zip(attr_idx, schema):
            cell = row[j].strip()
            try:
                values.append(float(cell))
            except ValueError:
                raise DatasetParseError(
                    f"row {row_no}: non-numeric value {cell!r} in column {name_dir[0]!r}"
                ) from None
        rows.append((row[id_idx].strip(), values))
    if not rows:
        raise DatasetValidationError("dataset needs at least one item")
    return rows


def as_weights(w: Sequence[float] | NDArray[np.float64], d: int) -> NDArray[np.float64]:
    """Validate a weight vector: length d, finite, non-negative, not all zero."""
    arr = np.asarray(w, dtype=np.float64)
    if arr.shape != (d,):
        raise ValueError(f"weight vector must have dimension {d}, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("weights must be finite")
    if (arr < -1e-9).any():
        raise ValueError("weights must be non-negative")
    arr = np.where(arr < 0, 0.0, arr)
    if not (arr > 0).any():
        raise ValueError("weights must not all be zero")
    return arr


def rank(dataset: Dataset, w: Sequence[float] | NDArray[np.float64]) -> Ranking:
    """Rank items by descending score under w, ties broken by ascending id."""
    weights = as_weights(w, dataset.d)
    scores = dataset.X @ weights
    order = np.lexsort((dataset.id_rank, -scores))
    ids = dataset.ids
    return Ranking(tuple(ids[i] for i in order))


def top_k(ranking: Ranking, k: int, mode: str = "set") -> TopKResult:
    """The first k entries of a ranking, ordered (``ranked``) or as a
    canonical id-sorted set (``set``)."""
    if not 1 <= k <= len(ranking.order):
        raise ValueError(f"k must be in [1, {len(ranking.order)}], got {k}")
    prefix = ranking.order[:k]
    if mode == "ranked":
        return TopKResult("ranked", k, prefix)
    if mode == "set":
        return TopKResult("set", k, tuple(sorted(prefix)))
    raise ValueError(f"mode must be 'set' or 'ranked', got {mode!r}")


SYNTHETIC_MODES = ("independent", "correlated", "anti_correlated")


def generate_synthetic(n: int, d: int, mode: str = "independent", seed: int = 0) -> Dataset:
    """Generate n items with d attributes in [0, 1] (deterministic per seed).

    ``independent`` draws attributes i.i.d. uniform; ``correlated`` scatters
    them around a shared per-item latent value; ``anti_correlated`` places
    items near a constant-sum plane so good values in one attribute trade off
    against the others.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 2:
        raise ValueError("d must be >= 2")
    if mode not in SYNTHETIC_MODES:
        raise ValueError(f"mode must be one of {SYNTHETIC_MODES}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    if mode == "independent":
        X = rng.random((n, d))
    elif mode == "correlated":
        latent = rng.random(n)
        X = np.clip(latent[:, None] + rng.normal(0.0, 0.1, (n, d)), 0.0, 1.0)
    else:
        plane = rng.normal(0.5, 0.05, n)
        offsets = rng.random((n, d))
        offsets -= offsets.mean(axis=1, keepdims=True)
        X = np.clip(plane[:, None] + offsets, 0.0, 1.0)
    width = len(str(n))
    ids = tuple(f"t{i + 1:0{width}d}" for i in range(n))
    meta = tuple(AttrMeta(f"a{j + 1}") for j in range(d))
    return Dataset(ids, X, meta)
