"""Session-oriented HTTP API over the drag engine.

JSON request/response bodies; per-iteration telemetry flows through a
server-sent-event stream with ids, so clients reconnect with the last id
they saw. Sessions live in memory only.
"""

from __future__ import annotations

import base64
import json
import os
import threading
import time

from fastapi import FastAPI, Header, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse, StreamingResponse

from ..engine import drag_step, finalize_run, init_session, step_record_json
from ..engine.config import DragConfig
from ..errors import BadConfig, NonFiniteGradient, OutOfBounds
from ..generator import Generator, GeneratorParams, encode_png
from ..harness import canonical_scenario
from .schemas import (
    ConfigRequest,
    ConfigResponse,
    CreateSessionRequest,
    ImageResponse,
    PairModel,
    SessionInfo,
    StateResponse,
    StepResponse,
)
from .store import SessionCapacity, SessionRecord, SessionStore, pairs_as_arrays

DEFAULT_SESSION_CAP = 32
DEFAULT_FRAME_STRIDE = 5


def _b64_png(image) -> str:
    return base64.b64encode(encode_png(image)).decode("ascii")


def _step_payload(record) -> dict:
    # Round-trip through the trace serializer so streamed records and
    # persisted trace lines cannot drift apart.
    return json.loads(step_record_json(record))


def create_app(
    session_cap: int | None = None, frame_stride: int | None = None
) -> FastAPI:
    cap = session_cap or int(os.environ.get("LATENTDRAG_SESSION_CAP", DEFAULT_SESSION_CAP))
    stride = frame_stride or int(
        os.environ.get("LATENTDRAG_FRAME_STRIDE", DEFAULT_FRAME_STRIDE)
    )
    app = FastAPI(title="latentdrag", version="0.1.0")
    # The browser companion is served from a different origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(cap=cap)
    app.state.store = store

    def _get(session_id: str) -> SessionRecord:
        record = store.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return record

    def _finalize_locked(rec: SessionRecord) -> None:
        run = finalize_run(rec.drag)
        rec.state = "converged" if run.converged else "capped"
        final = rec.generator.render(rec.drag.current_latent())
        rec.emit("summary", {"summary": run.summary_dict(), "frame": _b64_png(final)})

    def _advance_locked(rec: SessionRecord) -> bool:
        """One iteration under the session lock; True once terminal."""
        if rec.drag.terminated:
            _finalize_locked(rec)
            return True
        try:
            step = drag_step(rec.drag)
        except NonFiniteGradient:
            rec.state = "failed"
            diagnostic = _step_payload(rec.drag.trace[-1])
            rec.emit("step", {"record": diagnostic, "frame": None})
            rec.emit(
                "summary",
                {"summary": {"error": "non-finite gradient", "converged": False}},
            )
            return True
        frame = None
        if stride > 0 and step.iteration % stride == 0:
            frame = _b64_png(rec.generator.render(rec.drag.current_latent()))
        rec.emit("step", {"record": _step_payload(step), "frame": frame})
        if rec.drag.terminated:
            _finalize_locked(rec)
            return True
        return False

    def _run_loop(rec: SessionRecord) -> None:
        while True:
            with rec.lock:
                if rec.stop_requested:
                    rec.state = "paused"
                    rec.stop_requested = False
                    rec.cond.notify_all()
                    return
                done = _advance_locked(rec)
                if done:
                    rec.cond.notify_all()
                    return
            # Lock dropped between iterations: pause and streaming requests
            # interleave at step boundaries.

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(store)}

    @app.post("/sessions", response_model=SessionInfo)
    def create_session(body: CreateSessionRequest):
        suggested = None
        if body.scenario == "canonical":
            scenario = canonical_scenario()
            generator = Generator(scenario.generator_params)
            latent, pairs = scenario.build(generator, body.seed)
            handle, target = pairs[0]
            suggested = PairModel(
                handle=(float(handle[0]), float(handle[1])),
                target=(float(target[0]), float(target[1])),
            )
        elif body.scenario is not None:
            raise HTTPException(status_code=422, detail="unknown scenario")
        else:
            overrides = body.generator.model_dump(exclude_none=True) if body.generator else {}
            try:
                generator = Generator(GeneratorParams(**overrides))
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            latent = generator.sample_latent(body.seed)
        try:
            rec = store.create(generator, latent, body.seed)
        except SessionCapacity as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        image = generator.render(latent)
        p = generator.params
        return SessionInfo(
            session_id=rec.session_id,
            state=rec.state,
            image_png_base64=_b64_png(image),
            image_shape=(p.channels, p.height, p.width),
            feature_resolution=p.feature_resolution,
            n_layers=p.n_layers,
            latent_dim=p.latent_dim,
            suggested_pair=suggested,
        )

    @app.post("/sessions/{session_id}/config", response_model=ConfigResponse)
    def configure(session_id: str, body: ConfigRequest):
        rec = _get(session_id)
        with rec.lock:
            if rec.state == "running":
                raise HTTPException(status_code=409, detail="session is running")
            if rec.state != "configuring":
                raise HTTPException(
                    status_code=409, detail=f"cannot configure in state {rec.state}"
                )
            config = DragConfig(
                learning_rate=body.learning_rate,
                n_pca=body.n_pca,
                w_plus_layers=body.w_plus_layers,
                stopping_distance=body.stopping_distance,
                max_iterations=body.max_iterations,
                r1=body.r1,
                r2=body.r2,
                seed=rec.seed,
            )
            try:
                rec.drag = init_session(
                    rec.generator,
                    rec.latent,
                    pairs_as_arrays([(p.handle, p.target) for p in body.pairs]),
                    config,
                )
            except (OutOfBounds, BadConfig) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            rec.config = config
            rec.events.clear()
            rec.touch()
            return ConfigResponse(
                session_id=rec.session_id,
                state=rec.state,
                learning_rate=config.learning_rate,
                n_pca=config.n_pca,
                w_plus_layers=config.w_plus_layers,
                stopping_distance=config.stopping_distance,
                max_iterations=config.max_iterations,
                r1=config.r1,
                r2=config.r2,
                pairs=body.pairs,
            )

    @app.get("/sessions/{session_id}/image", response_model=ImageResponse)
    def current_image(session_id: str):
        rec = _get(session_id)
        with rec.lock:
            if rec.drag is not None:
                image = rec.generator.render(rec.drag.current_latent())
                pairs = [
                    PairModel(
                        handle=(float(p.handle[0]), float(p.handle[1])),
                        target=(float(p.target[0]), float(p.target[1])),
                    )
                    for p in rec.drag.pairs
                ]
                iteration = rec.drag.iteration
            else:
                image = rec.generator.render(rec.latent)
                pairs = []
                iteration = 0
            return ImageResponse(
                session_id=rec.session_id,
                state=rec.state,
                iteration=iteration,
                image_png_base64=_b64_png(image),
                pairs=pairs,
            )

    @app.post("/sessions/{session_id}/run", response_model=StateResponse)
    def start_run(session_id: str):
        rec = _get(session_id)
        with rec.lock:
            if rec.state == "running":
                raise HTTPException(status_code=409, detail="run already in progress")
            if rec.terminal:
                raise HTTPException(status_code=409, detail="session already finished")
            if rec.drag is None:
                raise HTTPException(status_code=409, detail="session not configured")
            rec.state = "running"
            rec.stop_requested = False
            rec.runner = threading.Thread(target=_run_loop, args=(rec,), daemon=True)
            rec.runner.start()
            return StateResponse(
                session_id=rec.session_id, state=rec.state, iteration=rec.drag.iteration
            )

    @app.post("/sessions/{session_id}/step", response_model=StepResponse)
    def step_once(session_id: str):
        rec = _get(session_id)
        with rec.lock:
            if rec.state == "running":
                raise HTTPException(status_code=409, detail="run already in progress")
            if rec.terminal:
                raise HTTPException(status_code=409, detail="session already finished")
            if rec.drag is None:
                raise HTTPException(status_code=409, detail="session not configured")
            done = _advance_locked(rec)
            if not done:
                rec.state = "paused"
            last = rec.events[-1]["data"] if rec.events else {}
            return StepResponse(
                session_id=rec.session_id,
                state=rec.state,
                record=last.get("record"),
                summary=last.get("summary"),
            )

    @app.post("/sessions/{session_id}/pause", response_model=StateResponse)
    def pause(session_id: str):
        rec = _get(session_id)
        with rec.lock:
            if rec.state == "running":
                rec.stop_requested = True
                rec.cond.wait_for(lambda: rec.state != "running", timeout=30.0)
            iteration = rec.drag.iteration if rec.drag is not None else 0
            return StateResponse(
                session_id=rec.session_id, state=rec.state, iteration=iteration
            )

    @app.delete("/sessions/{session_id}", response_model=StateResponse)
    def remove(session_id: str):
        rec = _get(session_id)
        with rec.lock:
            rec.stop_requested = True
        if rec.runner is not None and rec.runner.is_alive():
            rec.runner.join(timeout=30.0)
        store.delete(session_id)
        return StateResponse(session_id=session_id, state="deleted")

    @app.get("/sessions/{session_id}/trace", response_class=PlainTextResponse)
    def trace(session_id: str):
        rec = _get(session_id)
        with rec.lock:
            if rec.drag is None:
                raise HTTPException(status_code=409, detail="session not configured")
            lines = [step_record_json(step) for step in rec.drag.trace]
            return "\n".join(lines) + ("\n" if lines else "")

    @app.get("/sessions/{session_id}/events")
    def events(
        session_id: str,
        last_id: int = 0,
        last_event_id: str | None = Header(default=None),
    ):
        rec = _get(session_id)
        start_after = last_id
        if last_event_id:
            try:
                start_after = max(start_after, int(last_event_id))
            except ValueError:
                pass

        def sse():
            cursor = start_after
            while True:
                with rec.lock:
                    batch = list(rec.events[cursor:])
                    if not batch:
                        if rec.terminal:
                            return
                        rec.cond.wait(timeout=0.5)
                        batch = list(rec.events[cursor:])
                cursor += len(batch)
                saw_summary = False
                for event in batch:
                    saw_summary |= event["event"] == "summary"
                    yield (
                        f"id: {event['id']}\n"
                        f"event: {event['event']}\n"
                        f"data: {json.dumps(event['data'])}\n\n"
                    )
                if saw_summary:
                    return
                if store.get(session_id) is None:
                    return

        return StreamingResponse(sse(), media_type="text/event-stream")

    return app


app = create_app()
