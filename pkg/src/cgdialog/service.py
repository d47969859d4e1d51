"""HTTP interface: conversations, turns, memory snapshots, and an event stream.

Turns hold the conversation lock for their whole pipeline, so concurrent
posts to the same conversation serialize; distinct conversations proceed in
parallel. The event stream is server-sent events, one `turn` event per
completed turn, with keep-alive comments while idle.
"""

from __future__ import annotations

import json
import queue
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .engine import Engine
from .errors import CoverageError, DanglingSpan, EngineError, ParseFixtureMissing


class CreateConversationRequest(BaseModel):
    seed: str | None = None


class TurnRequest(BaseModel):
    text: str


def create_app(engine: Engine, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="cgdialog", version="0.1.0")

    def conversation(conv_id: str):
        try:
            return engine.get(conv_id)
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"no conversation {conv_id!r}")

    @app.get("/api/pack")
    def pack_info() -> dict:
        pack = engine.pack
        return {
            "name": pack.name,
            "concepts": len(pack.kb.features),
            "rules": sorted(r.name for r in pack.rules),
            "templates": sorted(t.name for t in pack.templates),
            "seeds": sorted(pack.seeds),
            "fixtures": len(pack.fixtures),
        }

    @app.get("/api/conversations")
    def list_conversations() -> list[dict]:
        out = []
        for conv_id in sorted(engine.conversations):
            conv = engine.conversations[conv_id]
            out.append({"id": conv_id, "seed": conv.seed,
                        "turns": len(conv.records),
                        "wm_size": len(conv.wm.graph.features)})
        return out

    @app.post("/api/conversations", status_code=201)
    def create_conversation(body: CreateConversationRequest) -> dict:
        try:
            conv = engine.create_conversation(seed=body.seed)
        except EngineError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"id": conv.id, "seed": conv.seed}

    @app.post("/api/conversations/{conv_id}/turns")
    def post_turn(conv_id: str, body: TurnRequest) -> dict:
        conversation(conv_id)
        try:
            return engine.process_turn(conv_id, body.text)
        except (ParseFixtureMissing, CoverageError, DanglingSpan) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"no conversation {conv_id!r}")
        except EngineError as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    @app.get("/api/conversations/{conv_id}/wm")
    def memory_snapshot(conv_id: str) -> dict:
        conversation(conv_id)
        return engine.snapshot(conv_id)

    @app.get("/api/conversations/{conv_id}/candidates")
    def last_candidates(conv_id: str) -> list[dict]:
        return conversation(conv_id).last_candidates

    @app.get("/api/conversations/{conv_id}/records")
    def records(conv_id: str) -> list[dict]:
        return conversation(conv_id).records

    @app.delete("/api/conversations/{conv_id}", status_code=204)
    def delete_conversation(conv_id: str) -> None:
        conversation(conv_id)
        try:
            engine.delete_conversation(conv_id)
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"no conversation {conv_id!r}")

    @app.get("/api/conversations/{conv_id}/events")
    def events(conv_id: str) -> StreamingResponse:
        conv = conversation(conv_id)
        listener: queue.Queue = queue.Queue()
        conv.listeners.append(listener)

        def stream():
            try:
                yield ": connected\n\n"
                while True:
                    try:
                        record = listener.get(timeout=15.0)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    if record is None:  # conversation deleted
                        return
                    yield "event: turn\ndata: " + json.dumps(record) + "\n\n"
            finally:
                if listener in conv.listeners:
                    conv.listeners.remove(listener)

        return StreamingResponse(stream(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache"})

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True),
                  name="frontend")

    return app


def serve(engine: Engine, host: str = "127.0.0.1", port: int = 8350,
          frontend_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(engine, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
