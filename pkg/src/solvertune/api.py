"""HTTP status endpoints and the stop control.

Read endpoints are side-effect-free and work identically for live and
finished experiments: everything is answered from journal snapshots, with a
live coordinator handle (when one is registered in-process) taking
precedence for the status view. Only POST /stop mutates.
"""

from __future__ import annotations

import errno
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse

from .errors import BindFailureError, CorruptRecordError
from .orchestrator import Coordinator, snapshot_from_state
from .persistence import JournalState, list_journals, load


def _load_state(journal_dir: Path, experiment_id: str) -> JournalState:
    path = journal_dir / f"{experiment_id}.jsonl"
    if not path.exists():
        raise HTTPException(status_code=404, detail=f"no experiment {experiment_id!r}")
    try:
        return load(path)
    except CorruptRecordError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from None


def create_app(journal_dir: Union[str, Path],
               live: Optional[dict[str, Coordinator]] = None,
               static_dir: Optional[Union[str, Path]] = None) -> FastAPI:
    """Build the API application over a journal directory.

    live maps experiment ids to in-process coordinators; their snapshots
    take precedence over journal reads while an experiment is running.
    """
    journal_dir = Path(journal_dir)
    live = live if live is not None else {}
    app = FastAPI(title="solvertune", docs_url=None, redoc_url=None)

    def snapshot_of(experiment_id: str) -> dict:
        coordinator = live.get(experiment_id)
        if coordinator is not None:
            return coordinator.snapshot()
        return snapshot_from_state(_load_state(journal_dir, experiment_id))

    @app.get("/api/experiments")
    def list_experiments():
        out = []
        for path in list_journals(journal_dir):
            out.append(snapshot_of(path.stem))
        return out

    @app.get("/api/experiments/{experiment_id}")
    def get_experiment(experiment_id: str):
        if experiment_id not in live:
            _load_state(journal_dir, experiment_id)  # 404 on unknown ids
        return snapshot_of(experiment_id)

    @app.get("/api/experiments/{experiment_id}/trials")
    def get_trials(experiment_id: str, page: int = Query(1, ge=1),
                   per_page: int = Query(100, ge=1, le=1000)):
        state = _load_state(journal_dir, experiment_id)
        trials = state.trials_in_order()
        start = (page - 1) * per_page
        return {
            "page": page,
            "per_page": per_page,
            "total": len(trials),
            "trials": [t.as_dict() for t in trials[start:start + per_page]],
        }

    @app.get("/api/experiments/{experiment_id}/best")
    def get_best(experiment_id: str):
        snap = snapshot_of(experiment_id)
        if snap["best"] is None:
            raise HTTPException(status_code=404, detail="no successful trial yet")
        return snap["best"]

    @app.get("/api/experiments/{experiment_id}/series")
    def get_series(experiment_id: str):
        state = _load_state(journal_dir, experiment_id)
        return {"series": [[tid, obj] for tid, obj in state.series()]}

    @app.post("/api/experiments/{experiment_id}/stop")
    def post_stop(experiment_id: str):
        snap = snapshot_of(experiment_id)
        if snap["status"] != "running":
            return JSONResponse(status_code=409, content={
                "detail": f"experiment is {snap['status']}, not running"})
        coordinator = live.get(experiment_id)
        if coordinator is not None:
            coordinator.request_stop()
        (journal_dir / f"{experiment_id}.stop").touch()
        return {"status": "stopping"}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="dashboard")

    return app


def serve(journal_dir: Union[str, Path], port: int = 8080, host: str = "127.0.0.1",
          live: Optional[dict[str, Coordinator]] = None,
          static_dir: Optional[Union[str, Path]] = None) -> None:
    """Run the API server; blocks until interrupted."""
    import socket

    import uvicorn

    app = create_app(journal_dir, live=live, static_dir=static_dir)
    # bind here so an occupied port surfaces as a structured error, not a
    # uvicorn startup exit
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.bind((host, port))
    except OSError as exc:
        sock.close()
        if exc.errno == errno.EADDRINUSE:
            raise BindFailureError(f"port {port} is already in use") from None
        raise BindFailureError(f"cannot bind {host}:{port}: {exc}") from None
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    try:
        server.run(sockets=[sock])
    finally:
        sock.close()
