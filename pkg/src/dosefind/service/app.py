"""HTTP face of the conduct service.

Thin adapters over the library: every decision returned by these endpoints
is computed by the same policy layer the simulator uses, and every error is
a problem-detail JSON body with a stable machine-readable code.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import List, Optional, Union

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..rules import EquivalenceInterval, Verdict
from ..tables import MAX_TABLE_N, TABLE_DESIGNS, generate_table
from .store import (
    ACTIVE,
    FinalizeActive,
    JobStore,
    Session,
    SessionNotActive,
    SessionStore,
    build_session_config,
)

DEFAULT_DATA_DIR = "./dosefind-data"


class ServiceError(Exception):
    def __init__(self, status: int, code: str, title: str, detail: str) -> None:
        super().__init__(detail)
        self.status = status
        self.code = code
        self.title = title
        self.detail = detail


def _problem(status: int, code: str, title: str, detail: str, errors=None) -> JSONResponse:
    body = {
        "type": "about:blank",
        "title": title,
        "status": status,
        "detail": detail,
        "code": code,
    }
    if errors:
        body["errors"] = errors
    return JSONResponse(body, status_code=status, media_type="application/problem+json")


class CreateTrialRequest(BaseModel):
    design: str
    p_target: float
    eps_lo: float
    eps_hi: float
    n_doses: int = 6
    safety_threshold: float = 0.95
    skeleton: Optional[List[float]] = None
    raw_doses: Optional[List[float]] = None
    ref_dose: Optional[float] = None
    p_ewoc: Optional[float] = None


class CohortRequest(BaseModel):
    dlt_count: int
    cohort_size: int


class FinalizeRequest(BaseModel):
    force: bool = False


class ScenarioBody(BaseModel):
    id: str = "custom"
    p_target: float
    true_tox: List[float]


class SimulationRequest(BaseModel):
    design: str
    p_target: float
    eps_lo: float
    eps_hi: float
    scenario: Optional[ScenarioBody] = None
    builtin: Optional[str] = None
    n_trials: int = 1000
    seed: int = 0
    max_patients: int = 30
    cohort_size: Union[int, str] = 3
    consecutive_stop_m: Optional[int] = None
    truncate_final_cohort: bool = False


_VERDICT_MESSAGES = {
    Verdict.ESCALATE: "Escalate to dose {next}.",
    Verdict.STAY: "Stay at dose {next}.",
    Verdict.DEESCALATE: "De-escalate to dose {next}.",
    Verdict.DEESCALATE_UNACCEPTABLE: (
        "De-escalate to dose {next}: dose {dose} is unacceptably toxic and is "
        "removed from further use."
    ),
    Verdict.TERMINATE: (
        "Terminate the trial: the lowest dose is unacceptably toxic."
    ),
}


def decision_message(verdict: Verdict, dose: int, next_dose: Optional[int]) -> str:
    return _VERDICT_MESSAGES[verdict].format(next=next_dose, dose=dose)


def _session_payload(session: Session) -> dict:
    cfg = session.config
    excluded = session.excluded_doses()
    return {
        "id": session.id,
        "design": cfg.design,
        "p_target": float(cfg.ei.p_target),
        "eps_lo": float(cfg.ei.eps_lo),
        "eps_hi": float(cfg.ei.eps_hi),
        "n_doses": cfg.n_doses,
        "status": session.status,
        "current_dose": session.state.current,
        "selected_mtd": session.selected_mtd,
        "total_patients": sum(session.state.n),
        "total_dlts": sum(session.state.x),
        "doses": [
            {
                "dose": d + 1,
                "n_treated": session.state.n[d],
                "n_dlt": session.state.x[d],
                "excluded": excluded[d],
            }
            for d in range(cfg.n_doses)
        ],
        "events": list(session.events),
    }


def create_app(
    data_dir: Optional[Union[str, Path]] = None,
    ui_dir: Optional[Union[str, Path]] = None,
    workers: Optional[int] = None,
) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get("DOSEFIND_DATA_DIR", DEFAULT_DATA_DIR))
    if workers is None:
        workers = int(os.environ.get("DOSEFIND_WORKERS", "2"))
    sessions = SessionStore(data_dir)
    jobs = JobStore(data_dir, workers=workers)

    app = FastAPI(title="dosefind", docs_url=None, redoc_url=None)
    app.state.sessions = sessions
    app.state.jobs = jobs

    @app.exception_handler(ServiceError)
    async def _service_error(_req: Request, exc: ServiceError) -> JSONResponse:
        return _problem(exc.status, exc.code, exc.title, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(
        _req: Request, exc: RequestValidationError
    ) -> JSONResponse:
        errors = [
            {
                "field": ".".join(str(p) for p in err.get("loc", []) if p != "body"),
                "message": err.get("msg", "invalid value"),
            }
            for err in exc.errors()
        ]
        return _problem(
            422,
            "validation_error",
            "Request body failed validation",
            "one or more fields are invalid",
            errors=errors,
        )

    def _get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ServiceError(
                404,
                "unknown_session",
                "No such trial session",
                f"no trial session with id {session_id}",
            )
        return session

    @app.post("/trials")
    def create_trial(body: CreateTrialRequest) -> dict:
        try:
            config = build_session_config(
                design=body.design,
                p_target=body.p_target,
                eps_lo=body.eps_lo,
                eps_hi=body.eps_hi,
                n_doses=body.n_doses,
                safety_threshold=body.safety_threshold,
                skeleton=body.skeleton,
                raw_doses=body.raw_doses,
                ref_dose=body.ref_dose,
                p_ewoc=body.p_ewoc,
            )
        except ValueError as exc:
            raise ServiceError(
                400, "invalid_config", "Invalid trial configuration", str(exc)
            )
        session = sessions.create(config)
        return _session_payload(session)

    @app.get("/trials/{session_id}")
    def get_trial(session_id: str) -> dict:
        return _session_payload(_get_session(session_id))

    @app.post("/trials/{session_id}/cohorts")
    def record_cohort(session_id: str, body: CohortRequest) -> dict:
        session = _get_session(session_id)
        dose = session.state.current
        try:
            _event, decision = sessions.record_cohort(
                session, body.dlt_count, body.cohort_size
            )
        except SessionNotActive as exc:
            raise ServiceError(
                409,
                "session_not_active",
                "Session no longer accepts cohorts",
                str(exc),
            )
        except ValueError as exc:
            raise ServiceError(400, "invalid_cohort", "Invalid cohort entry", str(exc))
        return {
            "decision": {
                "letter": decision.letter,
                "verdict": decision.verdict.value,
                "next_dose": decision.next_dose,
                "message": decision_message(decision.verdict, dose, decision.next_dose),
            },
            "session": _session_payload(session),
        }

    @app.post("/trials/{session_id}/finalize")
    def finalize_trial(
        session_id: str, body: Optional[FinalizeRequest] = None
    ) -> dict:
        session = _get_session(session_id)
        force = bool(body.force) if body is not None else False
        try:
            selected = sessions.finalize(session, force=force)
        except FinalizeActive as exc:
            raise ServiceError(
                409, "finalize_active", "Session is still active", str(exc)
            )
        if selected is None:
            message = "No dose can be selected as the MTD."
        else:
            message = f"Dose {selected} is selected as the MTD."
        return {
            "selected_mtd": selected,
            "message": message,
            "session": _session_payload(session),
        }

    @app.get("/designs/{name}/table")
    def decision_table(
        name: str,
        pt: float,
        eps_lo: float,
        eps_hi: float,
        max_n: int = 15,
        format: str = "json",
    ) -> Response:
        if name not in TABLE_DESIGNS:
            raise ServiceError(
                404,
                "unknown_design",
                "No decision table for this design",
                f"no decision table for {name!r}; valid: {', '.join(TABLE_DESIGNS)}",
            )
        if format not in ("json", "csv"):
            raise ServiceError(
                400, "invalid_config", "Invalid format", "format must be json or csv"
            )
        try:
            ei = EquivalenceInterval(pt, eps_lo, eps_hi)
        except ValueError as exc:
            raise ServiceError(
                400, "invalid_interval", "Invalid equivalence interval", str(exc)
            )
        if not 1 <= max_n <= MAX_TABLE_N:
            raise ServiceError(
                400,
                "invalid_config",
                "Invalid table size",
                f"max_n must be in 1..{MAX_TABLE_N}",
            )
        table = generate_table(name, ei, max_n)
        if format == "csv":
            return PlainTextResponse(table.to_csv())
        return Response(table.to_json(), media_type="application/json")

    @app.post("/simulations")
    def start_simulation(body: SimulationRequest) -> dict:
        job = jobs.submit(body.model_dump())
        return {"id": job["id"], "status": job["status"]}

    @app.get("/simulations/{job_id}")
    def get_simulation(job_id: str) -> dict:
        job = jobs.get(job_id)
        if job is None:
            raise ServiceError(
                404, "unknown_job", "No such simulation job",
                f"no simulation job with id {job_id}",
            )
        out = {"id": job["id"], "status": job["status"]}
        if "result" in job:
            out["result"] = job["result"]
        if "error" in job:
            out["error"] = job["error"]
        return out

    ui = ui_dir or os.environ.get("DOSEFIND_UI_DIR")
    if ui is None:
        candidate = Path("frontend") / "dist"
        if candidate.is_dir():
            ui = candidate
    if ui is not None and Path(ui).is_dir():
        app.mount("/", StaticFiles(directory=str(ui), html=True), name="ui")

    return app
