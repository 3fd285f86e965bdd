"""FastAPI control panel - the command service over HTTP, next to the socket server."""

import logging
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from .. import __version__

logger = logging.getLogger(__name__)

tags_metadata = [
    {"name": "Commands", "description": "Send wire commands; the response is the ack."},
    {"name": "Observe", "description": "Event log, attention state and metrics."},
]


def create_app(engine) -> FastAPI:
    """Build the panel for a running engine. Endpoints are async so they share the engine's loop."""
    app = FastAPI(
        title="earsim control panel",
        description="""
    Control panel for a simulated ear.

    *   `POST /command` takes one CommandMessage and returns its AckMessage.
    *   Each `client` query value gets its own seq space.
    *   `GET /events?since=N` pages through the event log.
    """,
        version=__version__,
        openapi_tags=tags_metadata,
    )
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    # --- Endpoints ---

    @app.post("/command", tags=["Commands"])
    async def command(body: Dict[str, Any], client: str = Query("http")) -> Dict[str, Any]:
        """Handle one command immediately; malformed bodies come back as bad_request acks."""
        ack = engine.handle(f"http:{client}", body)
        return ack.model_dump(mode="json", exclude_none=True)

    @app.get("/events", tags=["Observe"])
    async def events(since: int = Query(0, ge=0), limit: int = Query(500, ge=1, le=5000)) -> Dict[str, Any]:
        found = engine.log.since(since, limit)
        return {
            "events": [e.model_dump(mode="json", exclude_none=True) for e in found],
            "last_event_id": found[-1].event_id if found else since,
        }

    @app.get("/state", tags=["Observe"])
    async def state() -> Dict[str, Any]:
        return engine.state()

    @app.get("/metrics", tags=["Observe"])
    async def metrics() -> Dict[str, Any]:
        return engine.metrics()

    @app.get("/streams/{stream_id}", tags=["Observe"])
    async def stream(stream_id: str) -> Dict[str, Any]:
        track = engine.tracker.get(stream_id)
        if track is None:
            raise HTTPException(404, "Stream not found")
        return {
            "stream_id": track.stream_id,
            "category": track.category.model_dump(),
            "template": track.template,
            "azimuth": round(track.azimuth, 4),
            "birth": track.birth,
            "duration": round(track.duration, 6),
            "loudness_history": [list(p) for p in track.loudness_history],
        }

    @app.get("/health", tags=["Observe"])
    async def health() -> Dict[str, Any]:
        return {"status": "ok", "t": engine.now, "finished": engine.finished}

    return app
