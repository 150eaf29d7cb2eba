"""Command-line entry point binding every engine.

Subcommands: ``verify`` (stability of one ranking), ``get-next`` (stream
rankings in decreasing stability), ``enumerate2d`` (all 2D regions), and
``sample`` (export weight samples).  Exit codes: 0 success, 1 usage or
runtime failure, 2 infeasible ranking or degenerate region of interest.
Output is byte-identical for identical flags and seeds.
"""

from __future__ import annotations

import os

_THREAD_CAP = os.environ.get("STABLE_RANK_THREADS")
if _THREAD_CAP:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _THREAD_CAP)

import csv
import json
import sys
from typing import Iterable, Sequence

import click
import numpy as np

from stablerank.exact2d import get_next_2d, ray_sweep, verify_2d
from stablerank.exactmd import get_next_md, init_md_state, verify_md
from stablerank.geometry import roi_to_angle_interval_2d
from stablerank.model import (
    Dataset,
    InfeasibleRankingError,
    Ranking,
    RegionOfInterest,
    generate_synthetic,
    load_dataset,
    rank,
)
from stablerank.randomized import (
    SampleBudgetExceededError,
    get_next_fixed_budget,
    get_next_fixed_error,
    init_mc_state,
)
from stablerank.sampler import DegenerateRegionError, RngStream, sample_roi

FORMATS = ("json-lines", "csv", "table")


def _fmt(x: float) -> float:
    """Round to 12 significant digits for stable, byte-identical output."""
    return float(f"{x:.12g}")


class Emitter:
    """Writes result records as json-lines, csv, or an aligned table."""

    def __init__(self, fmt: str, fields: Sequence[str]):
        self.fmt = fmt
        self.fields = list(fields)
        self._csv = csv.writer(sys.stdout, lineterminator="\n") if fmt == "csv" else None
        self._wrote_header = False

    def _cell(self, value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return f"{value:.12g}"
        if isinstance(value, (list, tuple)):
            return " ".join(str(v) for v in value)
        return str(value)

    def emit(self, record: dict) -> None:
        if self.fmt == "json-lines":
            clean = {
                k: (_fmt(v) if isinstance(v, float) else v) for k, v in record.items()
            }
            sys.stdout.write(json.dumps(clean, sort_keys=True) + "\n")
            return
        row = [self._cell(record.get(f)) for f in self.fields]
        if self._csv is not None:
            if not self._wrote_header:
                self._csv.writerow(self.fields)
                self._wrote_header = True
            self._csv.writerow(row)
            return
        if not self._wrote_header:
            sys.stdout.write("  ".join(f"{f:>14}" for f in self.fields) + "\n")
            self._wrote_header = True
        sys.stdout.write("  ".join(f"{c:>14}" for c in row) + "\n")


def _echo_config(**kwargs) -> None:
    parts = " ".join(f"{k}={v}" for k, v in kwargs.items() if v is not None)
    click.echo(f"# {parts}", err=True)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise click.UsageError(f"expected comma-separated numbers, got {text!r}")


def _load(data, id_col, attr, synthetic, no_normalize=False) -> Dataset:
    if data and synthetic:
        raise click.UsageError("--data and --synthetic are mutually exclusive")
    if data:
        if not id_col or not attr:
            raise click.UsageError("--data needs --id-col and at least two --attr")
        return load_dataset(data, id_col, list(attr), normalize=not no_normalize)
    if synthetic:
        parts = synthetic.split(",")
        if len(parts) not in (3, 4):
            raise click.UsageError("--synthetic takes N,D,MODE[,SEED]")
        n, d = int(parts[0]), int(parts[1])
        mode = parts[2].strip()
        seed = int(parts[3]) if len(parts) == 4 else 0
        return generate_synthetic(n, d, mode, seed)
    raise click.UsageError("provide a dataset via --data or --synthetic")


def _build_roi(roi_ray, roi_angle, roi_constraint) -> RegionOfInterest:
    cone_flags = (roi_ray is not None) + (roi_angle is not None)
    if cone_flags == 1:
        raise click.UsageError("--roi-ray and --roi-angle go together")
    if cone_flags and roi_constraint:
        raise click.UsageError("choose one roi style: cone flags or --roi-constraint")
    if cone_flags:
        return RegionOfInterest.cone(_parse_floats(roi_ray), roi_angle)
    if roi_constraint:
        parsed = []
        for spec in roi_constraint:
            coeffs_text, sep, rel = spec.rpartition(":")
            if not sep or rel not in ("<=", "<", ">=", ">"):
                raise click.UsageError(
                    f"constraint {spec!r} must look like 'c1,c2,...:<relation>'"
                )
            parsed.append((_parse_floats(coeffs_text), rel))
        return RegionOfInterest.from_constraints(parsed)
    return RegionOfInterest.full()


dataset_options = [
    click.option("--data", type=click.Path(exists=True, dir_okay=False), help="CSV dataset path."),
    click.option("--id-col", help="Name of the id column in --data."),
    click.option("--attr", multiple=True, help="Scoring column as NAME:higher or NAME:lower (repeatable, in order)."),
    click.option("--synthetic", help="Generate data instead: N,D,MODE[,SEED] with MODE independent|correlated|anti_correlated."),
    click.option("--no-normalize", is_flag=True, help="Take --data values as already in [0, 1] instead of min-max scaling."),
]

roi_options = [
    click.option("--roi-ray", help="Cone region of interest: comma-separated reference ray."),
    click.option("--roi-angle", type=float, help="Cone region of interest: max angle from the ray (radians)."),
    click.option("--roi-constraint", multiple=True, help="Constraint region of interest: 'c1,c2,...:>=' (repeatable; homogeneous, rhs 0)."),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


@click.group()
def cli() -> None:
    """Stable-ranking analysis under linear scoring."""


@cli.command()
@_add_options(dataset_options)
@_add_options(roi_options)
@click.option("--ranking", help="Comma-separated item ids, best first.")
@click.option("--ranking-file", type=click.Path(exists=True, dir_okay=False), help="File of item ids (one per line), best first.")
@click.option("--weights", help="Derive the ranking from these comma-separated weights.")
@click.option("--samples", default=100_000, show_default=True, help="Sample-store size for d > 2 verification.")
@click.option("--alpha", default=0.05, show_default=True, help="1 - confidence level.")
@click.option("--seed", default=0, show_default=True, help="Random seed (d > 2 verification).")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="json-lines", show_default=True)
def verify(data, id_col, attr, synthetic, no_normalize, roi_ray, roi_angle, roi_constraint,
           ranking, ranking_file, weights, samples, alpha, seed, fmt) -> None:
    """Stability and region of one ranking (exit 2 when infeasible)."""
    dataset = _load(data, id_col, attr, synthetic, no_normalize)
    roi = _build_roi(roi_ray, roi_angle, roi_constraint)
    given = [x for x in (ranking, ranking_file, weights) if x]
    if len(given) != 1:
        raise click.UsageError("provide exactly one of --ranking, --ranking-file, --weights")
    if ranking:
        order = tuple(t.strip() for t in ranking.split(",") if t.strip())
    elif ranking_file:
        with open(ranking_file, "r", encoding="utf-8") as fh:
            order = tuple(t.strip() for t in fh.read().replace(",", "\n").split() if t.strip())
    else:
        order = rank(dataset, _parse_floats(weights)).order
    target = Ranking(order)
    _echo_config(command="verify", n=dataset.n, d=dataset.d, roi=roi.kind, seed=seed, alpha=alpha)
    emitter = Emitter(fmt, ["stability", "confidence_error", "theta1", "theta2", "halfspaces", "samples", "ranking"])
    if dataset.d == 2:
        res = verify_2d(dataset, target, roi)
        emitter.emit({
            "stability": res.stability,
            "stability_quadrant": res.stability_quadrant,
            "confidence_error": None,
            "theta1": _fmt(res.interval.lo),
            "theta2": _fmt(res.interval.hi),
            "samples": 0,
            "ranking": list(target.order),
        })
    else:
        res = verify_md(dataset, target, roi, n_samples=samples, seed=seed, alpha=alpha)
        emitter.emit({
            "stability": res.estimate.value,
            "confidence_error": res.estimate.confidence_error,
            "halfspaces": len(res.constraints),
            "samples": res.estimate.samples,
            "ranking": list(target.order),
        })


@cli.command("get-next")
@_add_options(dataset_options)
@_add_options(roi_options)
@click.option("--engine", type=click.Choice(["2d", "md", "random"]), help="Defaults to 2d when d = 2, else md.")
@click.option("--mode", type=click.Choice(["full", "topk-set", "topk-ranked"]), default="full", show_default=True)
@click.option("--k", type=int, help="Top-k size for topk-set / topk-ranked modes.")
@click.option("--count", default=1, show_default=True, help="How many results to stream.")
@click.option("--min-stability", type=float, help="Stop before emitting a result below this stability.")
@click.option("--samples", default=100_000, show_default=True, help="Sample-store size (md engine).")
@click.option("--budget", type=int, help="Samples per call (random engine, fixed-budget). [default: 10000]")
@click.option("--error", "error_target", type=float, help="Confidence-error target per call (random engine, fixed-error).")
@click.option("--sample-cap", default=10_000_000, show_default=True, help="Per-call safety cap (random engine, fixed-error).")
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--exact-fallback", is_flag=True, help="md engine: also exhaust regions thinner than the sample resolution (LP-based).")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="json-lines", show_default=True)
def get_next(data, id_col, attr, synthetic, no_normalize, roi_ray, roi_angle, roi_constraint,
             engine, mode, k, count, min_stability, samples, budget, error_target,
             sample_cap, alpha, seed, exact_fallback, fmt) -> None:
    """Stream rankings (or top-k results) in non-increasing stability order."""
    dataset = _load(data, id_col, attr, synthetic, no_normalize)
    roi = _build_roi(roi_ray, roi_angle, roi_constraint)
    if engine is None:
        engine = "2d" if dataset.d == 2 else "md"
    if engine in ("2d", "md") and mode != "full":
        raise click.UsageError(f"engine {engine} supports only --mode full (exact top-k regions are not merged)")
    if engine == "2d" and dataset.d != 2:
        raise click.UsageError("engine 2d needs a 2-attribute dataset")
    if mode != "full" and (k is None or k < 1):
        raise click.UsageError("top-k modes need --k >= 1")
    if budget is not None and error_target is not None:
        raise click.UsageError("--budget and --error are mutually exclusive")
    if count < 0:
        raise click.UsageError("--count must be >= 0")
    mc_mode = mode.replace("-", "_")
    _echo_config(command="get-next", engine=engine, mode=mode, k=k, n=dataset.n,
                 d=dataset.d, roi=roi.kind, seed=seed, alpha=alpha,
                 samples=samples if engine == "md" else None,
                 budget=budget, error=error_target)
    emitter = Emitter(fmt, ["index", "stability", "confidence_error", "weights", "ranking"])

    def results() -> Iterable[dict]:
        if engine == "2d":
            heap = ray_sweep(dataset, roi_to_angle_interval_2d(roi))
            while True:
                res = get_next_2d(heap, dataset)
                if res is None:
                    return
                yield {
                    "stability": res.stability,
                    "confidence_error": None,
                    "weights": [_fmt(w) for w in res.weights],
                    "theta1": _fmt(res.interval.lo),
                    "theta2": _fmt(res.interval.hi),
                    "ranking": list(res.ranking.order),
                }
        elif engine == "md":
            state = init_md_state(dataset, roi, n_samples=samples, seed=seed,
                                  alpha=alpha, exact_fallback=exact_fallback)
            while True:
                res = get_next_md(state)
                if res is None:
                    return
                yield {
                    "stability": res.estimate.value,
                    "confidence_error": res.estimate.confidence_error,
                    "weights": [_fmt(w) for w in res.weights],
                    "ranking": list(res.ranking.order),
                }
        else:
            state = init_mc_state(mc_mode, k, seed=seed)
            while True:
                if error_target is not None:
                    res = get_next_fixed_error(state, dataset, roi, e_target=error_target,
                                               alpha=alpha, sample_cap=sample_cap)
                else:
                    res = get_next_fixed_budget(state, dataset, roi,
                                                budget=budget or 10_000, alpha=alpha)
                if res is None:
                    return
                record = {
                    "stability": res.estimate.value,
                    "confidence_error": res.estimate.confidence_error,
                    "weights": [_fmt(w) for w in res.weights],
                }
                if mc_mode == "full":
                    record["ranking"] = list(res.key)
                else:
                    record["topk"] = list(res.key)
                yield record

    for index, record in enumerate(results(), start=1):
        if index > count:
            break
        if min_stability is not None and record["stability"] < min_stability:
            break
        emitter.emit({"index": index, **record})


@cli.command()
@_add_options(dataset_options)
@_add_options(roi_options)
@click.option("--limit", type=int, help="Emit at most this many regions (default: all).")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="json-lines", show_default=True)
def enumerate2d(data, id_col, attr, synthetic, no_normalize, roi_ray, roi_angle, roi_constraint, limit, fmt) -> None:
    """Enumerate every 2D ranking region, most stable first."""
    dataset = _load(data, id_col, attr, synthetic, no_normalize)
    if dataset.d != 2:
        raise click.UsageError("enumerate2d needs a 2-attribute dataset")
    roi = _build_roi(roi_ray, roi_angle, roi_constraint)
    heap = ray_sweep(dataset, roi_to_angle_interval_2d(roi))
    _echo_config(command="enumerate2d", n=dataset.n, regions=heap.region_count, roi=roi.kind)
    emitter = Emitter(fmt, ["index", "stability", "theta1", "theta2", "ranking"])
    index = 0
    while limit is None or index < limit:
        res = get_next_2d(heap, dataset)
        if res is None:
            break
        index += 1
        emitter.emit({
            "index": index,
            "stability": res.stability,
            "theta1": _fmt(res.interval.lo),
            "theta2": _fmt(res.interval.hi),
            "ranking": list(res.ranking.order),
        })


@cli.command()
@_add_options(roi_options)
@click.option("--count", default=1, show_default=True, help="Number of weight vectors.")
@click.option("--dim", type=int, help="Dimension d (required unless the roi pins it).")
@click.option("--seed", default=0, show_default=True)
def sample(roi_ray, roi_angle, roi_constraint, count, dim, seed) -> None:
    """Draw uniform weight vectors from the region of interest (CSV rows)."""
    roi = _build_roi(roi_ray, roi_angle, roi_constraint)
    d = dim or roi.dim
    if d is None:
        raise click.UsageError("--dim is required for a full-quadrant roi")
    if roi.dim is not None and d != roi.dim:
        raise click.UsageError(f"--dim {d} contradicts the roi dimension {roi.dim}")
    if count < 0:
        raise click.UsageError("--count must be >= 0")
    _echo_config(command="sample", d=d, roi=roi.kind, seed=seed)
    if count == 0:
        return
    W = np.atleast_2d(sample_roi(roi, d, RngStream(seed), size=count))
    for row in W:
        sys.stdout.write(",".join(f"{x:.12g}" for x in row) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except InfeasibleRankingError as exc:
        click.echo(f"infeasible ranking: {exc}", err=True)
        return 2
    except DegenerateRegionError as exc:
        click.echo(f"degenerate region of interest: {exc}", err=True)
        return 2
    except SampleBudgetExceededError as exc:
        best = ""
        if exc.best is not None:
            key, est = exc.best
            best = f"; best candidate so far: {','.join(key)} at {est.value:.6g} +/- {est.confidence_error:.3g}"
        click.echo(f"sample budget exceeded after {exc.drawn} draws{best}", err=True)
        return 1
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
