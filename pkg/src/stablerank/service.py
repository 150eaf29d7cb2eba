"""HTTP/JSON session service exposing the ranking engines.

Endpoints:
  POST   /api/datasets            upload CSV (body) + schema query params
  POST   /api/sessions            create an engine session
  POST   /api/sessions/{id}/next  next-most-stable result (204 when exhausted)
  GET    /api/sessions/{id}       session parameters + full history
  DELETE /api/sessions/{id}       drop a session
  POST   /api/verify              stability of one ranking (or of weights)

Sessions live in memory, are serialized per session, and expire after an
idle TTL.  If a built UI bundle exists it is served at ``/``.
"""

from __future__ import annotations

import argparse
import io
import itertools
import json
import os
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from fastapi import FastAPI, HTTPException, Query, Request, Response
from pydantic import BaseModel

from stablerank.exact2d import RegionHeap, get_next_2d, ray_sweep, verify_2d
from stablerank.exactmd import MdState, get_next_md, init_md_state, verify_md
from stablerank.geometry import roi_to_angle_interval_2d
from stablerank.model import (
    Dataset,
    DatasetParseError,
    DatasetValidationError,
    InfeasibleRankingError,
    Ranking,
    RegionOfInterest,
    load_dataset,
    rank,
)
from stablerank.randomized import (
    DEFAULT_SAMPLE_CAP,
    MonteCarloState,
    SampleBudgetExceededError,
    get_next_fixed_budget,
    get_next_fixed_error,
    init_mc_state,
)
from stablerank.sampler import DegenerateRegionError

ENGINES = ("2d", "md", "random")
DEFAULT_TTL_SECONDS = 3600.0


class ConstraintSpec(BaseModel):
    coeffs: list[float]
    relation: str


class RoiSpec(BaseModel):
    kind: str = "full"
    ray: Optional[list[float]] = None
    max_angle: Optional[float] = None
    constraints: Optional[list[ConstraintSpec]] = None


class SessionParams(BaseModel):
    samples: int = 100_000
    seed: int = 0
    alpha: float = 0.05
    exact_fallback: bool = False
    budget: Optional[int] = None
    error: Optional[float] = None
    sample_cap: int = DEFAULT_SAMPLE_CAP


class SessionCreate(BaseModel):
    dataset_id: str
    engine: str
    mode: str = "full"
    k: Optional[int] = None
    roi: Optional[RoiSpec] = None
    params: SessionParams = SessionParams()


class NextParams(BaseModel):
    budget: Optional[int] = None
    error: Optional[float] = None
    sample_cap: Optional[int] = None


class VerifyRequest(BaseModel):
    dataset_id: str
    ranking: Optional[list[str]] = None
    weights: Optional[list[float]] = None
    roi: Optional[RoiSpec] = None
    samples: int = 100_000
    seed: int = 0
    alpha: float = 0.05


@dataclass
class Session:
    id: str
    dataset_id: str
    dataset: Dataset
    roi: RegionOfInterest
    roi_spec: dict
    engine: str
    mode: str
    k: Optional[int]
    params: SessionParams
    state: RegionHeap | MdState | MonteCarloState
    history: list[dict] = field(default_factory=list)
    exhausted: bool = False
    created: float = field(default_factory=time.time)
    last_used: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


def _roi_from_spec(spec: Optional[RoiSpec]) -> RegionOfInterest:
    if spec is None:
        return RegionOfInterest.full()
    if spec.kind == "full":
        return RegionOfInterest.full()
    if spec.kind == "cone":
        if spec.ray is None or spec.max_angle is None:
            raise ValueError("cone roi needs 'ray' and 'max_angle'")
        return RegionOfInterest.cone(spec.ray, spec.max_angle)
    if spec.kind == "constraints":
        if not spec.constraints:
            raise ValueError("constraints roi needs a non-empty 'constraints' list")
        return RegionOfInterest.from_constraints(
            [(c.coeffs, c.relation) for c in spec.constraints]
        )
    raise ValueError(f"unknown roi kind {spec.kind!r}")


def create_app(
    *,
    ttl_seconds: float = DEFAULT_TTL_SECONDS,
    clock: Callable[[], float] = time.monotonic,
    static_dir: str | os.PathLike | None = None,
    snapshot_path: str | os.PathLike | None = None,
) -> FastAPI:
    """Build the application; ``clock`` and ``ttl_seconds`` are injectable for tests."""
    datasets: dict[str, Dataset] = {}
    sessions: dict[str, Session] = {}
    dataset_ids = itertools.count(1)
    session_ids = itertools.count(1)

    @asynccontextmanager
    async def _lifespan(_: FastAPI):
        yield
        if snapshot_path is not None:
            payload = {
                "sessions": [
                    {
                        "session_id": s.id,
                        "dataset_id": s.dataset_id,
                        "engine": s.engine,
                        "mode": s.mode,
                        "k": s.k,
                        "roi": s.roi_spec,
                        "history": s.history,
                    }
                    for s in sessions.values()
                ]
            }
            Path(snapshot_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")

    app = FastAPI(title="stablerank", version="0.1.0", lifespan=_lifespan)

    def _purge_idle() -> None:
        now = clock()
        for sid in [s.id for s in sessions.values() if now - s.last_used > ttl_seconds]:
            sessions.pop(sid, None)

    def _get_session(sid: str) -> Session:
        _purge_idle()
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {sid!r}")
        return session

    def _get_dataset(dataset_id: str) -> Dataset:
        dataset = datasets.get(dataset_id)
        if dataset is None:
            raise HTTPException(status_code=404, detail=f"unknown dataset {dataset_id!r}")
        return dataset

    @app.post("/api/datasets")
    async def upload_dataset(
        request: Request,
        id_col: str = Query(...),
        attr: list[str] = Query(...),
        normalize: bool = Query(True),
    ) -> dict:
        body = await request.body()
        try:
            dataset = load_dataset(
                io.StringIO(body.decode("utf-8")), id_col, list(attr), normalize=normalize
            )
        except (DatasetParseError, DatasetValidationError, ValueError, UnicodeDecodeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        dataset_id = f"ds-{next(dataset_ids)}"
        datasets[dataset_id] = dataset
        return {
            "dataset_id": dataset_id,
            "n": dataset.n,
            "d": dataset.d,
            "ids": list(dataset.ids),
            "attr_meta": [
                {
                    "name": m.name,
                    "direction": m.direction,
                    "raw_min": m.raw_min,
                    "raw_max": m.raw_max,
                }
                for m in dataset.attr_meta
            ],
        }

    @app.post("/api/sessions")
    def create_session(body: SessionCreate) -> dict:
        _purge_idle()
        dataset = _get_dataset(body.dataset_id)
        if body.engine not in ENGINES:
            raise HTTPException(status_code=422, detail=f"unknown engine {body.engine!r}")
        mode = body.mode.replace("-", "_")
        if body.engine in ("2d", "md") and mode != "full":
            raise HTTPException(
                status_code=422,
                detail=f"engine {body.engine!r} supports only mode 'full'",
            )
        if body.engine == "2d" and dataset.d != 2:
            raise HTTPException(status_code=422, detail="engine '2d' needs a 2-attribute dataset")
        if mode not in ("full", "topk_set", "topk_ranked"):
            raise HTTPException(status_code=422, detail=f"unknown mode {body.mode!r}")
        if mode != "full" and (body.k is None or body.k < 1):
            raise HTTPException(status_code=422, detail="top-k modes need k >= 1")
        try:
            roi = _roi_from_spec(body.roi)
            params = body.params
            state: RegionHeap | MdState | MonteCarloState
            region_count: Optional[int] = None
            if body.engine == "2d":
                state = ray_sweep(dataset, roi_to_angle_interval_2d(roi))
                region_count = state.region_count
            elif body.engine == "md":
                state = init_md_state(
                    dataset,
                    roi,
                    n_samples=params.samples,
                    seed=params.seed,
                    alpha=params.alpha,
                    exact_fallback=params.exact_fallback,
                )
            else:
                state = init_mc_state(mode, body.k, seed=params.seed)
        except (ValueError, DegenerateRegionError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        session = Session(
            id=f"s-{next(session_ids)}",
            dataset_id=body.dataset_id,
            dataset=dataset,
            roi=roi,
            roi_spec=body.roi.model_dump() if body.roi else {"kind": "full"},
            engine=body.engine,
            mode=mode,
            k=body.k,
            params=params,
            state=state,
            last_used=clock(),
        )
        sessions[session.id] = session
        out = {
            "session_id": session.id,
            "dataset_id": session.dataset_id,
            "engine": session.engine,
            "mode": session.mode,
            "k": session.k,
            "n": dataset.n,
            "d": dataset.d,
        }
        if region_count is not None:
            out["region_count"] = region_count
        return out

    def _next_record(session: Session, over: NextParams) -> Optional[dict]:
        if session.engine == "2d":
            res = get_next_2d(session.state, session.dataset)
            if res is None:
                return None
            return {
                "stability": res.stability,
                "confidence_error": None,
                "weights": [float(w) for w in res.weights],
                "ranking": list(res.ranking.order),
                "region": {"theta1": res.interval.lo, "theta2": res.interval.hi},
            }
        if session.engine == "md":
            res = get_next_md(session.state)
            if res is None:
                return None
            return {
                "stability": res.estimate.value,
                "confidence_error": res.estimate.confidence_error,
                "weights": [float(w) for w in res.weights],
                "ranking": list(res.ranking.order),
            }
        params = session.params
        error = over.error if over.error is not None else params.error
        budget = over.budget if over.budget is not None else params.budget
        cap = over.sample_cap if over.sample_cap is not None else params.sample_cap
        if error is not None:
            res = get_next_fixed_error(
                session.state, session.dataset, session.roi,
                e_target=error, alpha=params.alpha, sample_cap=cap,
            )
        else:
            res = get_next_fixed_budget(
                session.state, session.dataset, session.roi,
                budget=budget or 10_000, alpha=params.alpha,
            )
        if res is None:
            return None
        record = {
            "stability": res.estimate.value,
            "confidence_error": res.estimate.confidence_error,
            "weights": [float(w) for w in res.weights],
            "samples_used": res.samples_used,
        }
        if session.mode == "full":
            record["ranking"] = list(res.key)
        else:
            record["topk"] = list(res.key)
        return record

    @app.post("/api/sessions/{sid}/next")
    def session_next(sid: str, body: Optional[NextParams] = None) -> Response:
        session = _get_session(sid)
        over = body or NextParams()
        with session.lock:
            session.last_used = clock()
            try:
                record = _next_record(session, over)
            except SampleBudgetExceededError as exc:
                raise HTTPException(
                    status_code=422,
                    detail=f"sample budget exceeded after {exc.drawn} draws; "
                    "retry with a larger sample_cap or a looser error target",
                )
            if record is None:
                session.exhausted = True
                return Response(status_code=204)
            record["index"] = len(session.history) + 1
            session.history.append(record)
        return Response(content=json.dumps(record), media_type="application/json")

    @app.get("/api/sessions/{sid}")
    def session_info(sid: str) -> dict:
        session = _get_session(sid)
        with session.lock:
            return {
                "session_id": session.id,
                "dataset_id": session.dataset_id,
                "engine": session.engine,
                "mode": session.mode,
                "k": session.k,
                "roi": session.roi_spec,
                "exhausted": session.exhausted,
                "created": session.created,
                "history": list(session.history),
            }

    @app.delete("/api/sessions/{sid}")
    def session_delete(sid: str) -> Response:
        _get_session(sid)
        sessions.pop(sid, None)
        return Response(status_code=204)

    @app.post("/api/verify")
    def verify(body: VerifyRequest) -> dict:
        dataset = _get_dataset(body.dataset_id)
        if (body.ranking is None) == (body.weights is None):
            raise HTTPException(
                status_code=422, detail="provide exactly one of 'ranking' or 'weights'"
            )
        try:
            roi = _roi_from_spec(body.roi)
            if body.weights is not None:
                target = rank(dataset, body.weights)
            else:
                target = Ranking(tuple(body.ranking))
            if dataset.d == 2:
                res = verify_2d(dataset, target, roi)
                return {
                    "stability": res.stability,
                    "stability_quadrant": res.stability_quadrant,
                    "confidence_error": None,
                    "region": {"theta1": res.interval.lo, "theta2": res.interval.hi},
                    "ranking": list(target.order),
                    "samples": 0,
                }
            res = verify_md(
                dataset, target, roi,
                n_samples=body.samples, seed=body.seed, alpha=body.alpha,
            )
            return {
                "stability": res.estimate.value,
                "confidence_error": res.estimate.confidence_error,
                "region": {"halfspaces": len(res.constraints)},
                "ranking": list(target.order),
                "samples": res.estimate.samples,
            }
        except InfeasibleRankingError as exc:
            raise HTTPException(status_code=422, detail=f"infeasible ranking: {exc}")
        except (ValueError, DegenerateRegionError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    resolved_static = Path(static_dir) if static_dir else (
        Path(__file__).resolve().parents[2] / "frontend" / "dist"
    )
    if resolved_static.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(resolved_static), html=True), name="ui")

    return app


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Run the stable-ranking HTTP service.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument(
        "--port", type=int, default=int(os.environ.get("STABLE_RANK_PORT", "8000"))
    )
    parser.add_argument("--ttl", type=float, default=DEFAULT_TTL_SECONDS,
                        help="Idle session lifetime in seconds.")
    parser.add_argument("--static-dir", default=None, help="UI bundle directory to serve at /.")
    parser.add_argument("--snapshot", default=None,
                        help="Write session histories to this JSON file on shutdown.")
    args = parser.parse_args(argv)
    import uvicorn

    app = create_app(
        ttl_seconds=args.ttl, static_dir=args.static_dir, snapshot_path=args.snapshot
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
