"""Durable state for the conduct service.

Each trial session is an append-only JSONL event log on disk; the in-memory
session object is always reconstructible by replaying its log, which doubles
as crash recovery.  Simulation jobs persist their status and result beside
the session logs.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..bayes import (
    SafetyConfig,
    boin_select_mtd,
    estimates_from_outcomes,
    safety_veto,
    select_mtd,
)
from ..model_based import BlrmConfig, CrmConfig
from ..rules import DoseOutcome, EquivalenceInterval
from ..scenarios import Scenario, select_builtin
from ..simulate import (
    Policy,
    PolicyDecision,
    SimConfig,
    StopKind,
    TrialState,
    make_policy,
    run_simulation,
)

SESSION_DESIGNS = ("i3p3", "boin", "crm", "blrm")

ACTIVE = "Active"
TERMINATED = "Terminated"
COMPLETED = "Completed"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass(frozen=True)
class SessionConfig:
    """Resolved design configuration for one live trial."""

    design: str
    ei: EquivalenceInterval
    n_doses: int
    safety: SafetyConfig
    crm: Optional[CrmConfig] = None
    blrm: Optional[BlrmConfig] = None

    def as_event(self) -> dict:
        event = {
            "type": "created",
            "ts": _now(),
            "design": self.design,
            "p_target": float(self.ei.p_target),
            "eps_lo": float(self.ei.eps_lo),
            "eps_hi": float(self.ei.eps_hi),
            "n_doses": self.n_doses,
            "safety_threshold": self.safety.threshold,
        }
        if self.crm is not None:
            event["skeleton"] = list(self.crm.skeleton)
        if self.blrm is not None:
            event["raw_doses"] = list(self.blrm.raw_doses)
            event["ref_dose"] = self.blrm.ref_dose
            event["p_ewoc"] = self.blrm.p_ewoc
        return event


def build_session_config(
    design: str,
    p_target: float,
    eps_lo: float,
    eps_hi: float,
    n_doses: int,
    safety_threshold: float = 0.95,
    skeleton: Optional[List[float]] = None,
    raw_doses: Optional[List[float]] = None,
    ref_dose: Optional[float] = None,
    p_ewoc: Optional[float] = None,
) -> SessionConfig:
    """Validate and resolve a creation request into a full design config.

    Raises ValueError with a human-readable message on any bad field; the
    service maps that to a rejection.
    """
    if design not in SESSION_DESIGNS:
        raise ValueError(
            f"unknown design {design!r}; valid: {', '.join(SESSION_DESIGNS)}"
        )
    if n_doses < 1:
        raise ValueError("n_doses must be at least 1")
    ei = EquivalenceInterval(p_target, eps_lo, eps_hi)
    safety = SafetyConfig(threshold=safety_threshold)
    crm = None
    blrm = None
    if design == "crm":
        if skeleton is not None:
            if len(skeleton) != n_doses:
                raise ValueError("skeleton length must equal n_doses")
            crm = CrmConfig(tuple(skeleton), ei.p_target, safety=safety)
        else:
            crm = CrmConfig.default(ei.p_target, n_doses)
            crm = CrmConfig(crm.skeleton, ei.p_target, safety=safety)
    elif design == "blrm":
        base = BlrmConfig.default(ei.p_target, n_doses)
        doses = tuple(raw_doses) if raw_doses is not None else base.raw_doses
        if len(doses) != n_doses:
            raise ValueError("raw_doses length must equal n_doses")
        ref = ref_dose if ref_dose is not None else doses[len(doses) // 2]
        blrm = BlrmConfig(
            doses,
            ref,
            ei.p_target,
            eps_lo=ei.eps_lo,
            eps_hi=ei.eps_hi,
            p_ewoc=p_ewoc if p_ewoc is not None else base.p_ewoc,
            safety=safety,
        )
    return SessionConfig(design, ei, n_doses, safety, crm, blrm)


def _config_from_event(event: dict) -> SessionConfig:
    return build_session_config(
        design=event["design"],
        p_target=event["p_target"],
        eps_lo=event["eps_lo"],
        eps_hi=event["eps_hi"],
        n_doses=event["n_doses"],
        safety_threshold=event.get("safety_threshold", 0.95),
        skeleton=event.get("skeleton"),
        raw_doses=event.get("raw_doses"),
        ref_dose=event.get("ref_dose"),
        p_ewoc=event.get("p_ewoc"),
    )


class Session:
    """One live trial: config, mutable state, and its event history."""

    def __init__(self, session_id: str, config: SessionConfig) -> None:
        self.id = session_id
        self.config = config
        self.policy: Policy = make_policy(
            config.design,
            config.n_doses,
            config.ei,
            config.safety,
            config.crm,
            config.blrm,
        )
        self.state = TrialState(config.n_doses)
        self.status = ACTIVE
        self.events: List[dict] = []
        self.selected_mtd: Optional[int] = None
        self.finalized = False
        self.lock = threading.Lock()

    def decide(self, last_size: int, last_dlt: int) -> PolicyDecision:
        return self.policy.decide(self.state, last_size, last_dlt)

    def excluded_doses(self) -> List[bool]:
        """Doses whose accumulated data alone marks them unacceptable.  The
        flags are recomputed from data, never stored, so they can't drift."""
        out = []
        for d in range(1, self.config.n_doses + 1):
            outcome = self.state.outcome(d)
            out.append(
                outcome.n_treated > 0
                and safety_veto(outcome, self.config.ei.p_target, self.config.safety)
            )
        return out

    def select(self) -> Optional[int]:
        outcomes = [
            self.state.outcome(d) for d in range(1, self.config.n_doses + 1)
        ]
        if self.config.design == "boin":
            return boin_select_mtd(outcomes, self.config.ei, self.config.safety)
        return select_mtd(estimates_from_outcomes(outcomes), self.config.ei)


class SessionStore:
    """All sessions, backed by one JSONL file each under data_dir/sessions."""

    def __init__(self, data_dir: Union[str, Path]) -> None:
        self.dir = Path(data_dir) / "sessions"
        self.dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sessions: Dict[str, Session] = {}
        for path in sorted(self.dir.glob("*.jsonl")):
            session = self._replay(path)
            if session is not None:
                self._sessions[session.id] = session

    def _path(self, session_id: str) -> Path:
        return self.dir / f"{session_id}.jsonl"

    def _replay(self, path: Path) -> Optional[Session]:
        try:
            lines = path.read_text().splitlines()
        except OSError:
            return None
        if not lines:
            return None
        created = json.loads(lines[0])
        if created.get("type") != "created":
            return None
        session = Session(path.stem, _config_from_event(created))
        session.events.append(created)
        for line in lines[1:]:
            event = json.loads(line)
            session.events.append(event)
            kind = event.get("type")
            if kind == "cohort":
                d = event["dose"]
                session.state.n[d - 1] += event["size"]
                session.state.x[d - 1] += event["dlt"]
                if event.get("verdict") == "T":
                    session.status = TERMINATED
                elif event.get("next_dose"):
                    session.state.current = event["next_dose"]
            elif kind == "finalized":
                session.status = COMPLETED
                session.selected_mtd = event.get("selected_mtd")
                session.finalized = True
        return session

    def _append(self, session: Session, event: dict) -> None:
        line = json.dumps(event, sort_keys=True, separators=(",", ":"))
        with open(self._path(session.id), "a") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def create(self, config: SessionConfig) -> Session:
        session_id = uuid.uuid4().hex
        session = Session(session_id, config)
        event = config.as_event()
        with self._lock:
            self._append(session, event)
            session.events.append(event)
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Optional[Session]:
        with self._lock:
            return self._sessions.get(session_id)

    def record_cohort(
        self, session: Session, dlt_count: int, cohort_size: int
    ) -> Tuple[dict, PolicyDecision]:
        """Apply one cohort outcome at the current dose.

        Validates first; on any failure the state and the log are untouched.
        The event reaches disk before the in-memory transition commits.
        """
        with session.lock:
            if session.status != ACTIVE:
                raise SessionNotActive(session.status)
            if cohort_size < 1:
                raise ValueError("cohort_size must be at least 1")
            if not 0 <= dlt_count <= cohort_size:
                raise ValueError(
                    f"dlt_count must be between 0 and cohort_size={cohort_size}"
                )
            d = session.state.current
            session.state.n[d - 1] += cohort_size
            session.state.x[d - 1] += dlt_count
            try:
                decision = session.decide(cohort_size, dlt_count)
                event = {
                    "type": "cohort",
                    "ts": _now(),
                    "dose": d,
                    "size": cohort_size,
                    "dlt": dlt_count,
                    "n_at_dose": session.state.n[d - 1],
                    "x_at_dose": session.state.x[d - 1],
                    "letter": decision.letter,
                    "verdict": decision.verdict.value,
                    "next_dose": decision.next_dose,
                }
                self._append(session, event)
            except Exception:
                session.state.n[d - 1] -= cohort_size
                session.state.x[d - 1] -= dlt_count
                raise
            session.events.append(event)
            if decision.stop is StopKind.SAFETY:
                session.status = TERMINATED
            else:
                session.state.current = decision.next_dose
            return event, decision

    def finalize(self, session: Session, force: bool = False) -> Optional[int]:
        with session.lock:
            if session.finalized:
                return session.selected_mtd
            if session.status == ACTIVE and not force:
                raise FinalizeActive()
            selected = None if session.status == TERMINATED else session.select()
            event = {
                "type": "finalized",
                "ts": _now(),
                "selected_mtd": selected,
                "forced": force,
            }
            self._append(session, event)
            session.events.append(event)
            session.status = COMPLETED
            session.selected_mtd = selected
            session.finalized = True
            return selected


class SessionNotActive(Exception):
    def __init__(self, status: str) -> None:
        super().__init__(f"session is {status}, not Active")
        self.status = status


class FinalizeActive(Exception):
    def __init__(self) -> None:
        super().__init__(
            "session is still Active; pass force=true to finalize anyway"
        )


QUEUED = "Queued"
RUNNING = "Running"
DONE = "Done"
FAILED = "Failed"


def build_sim_inputs(payload: dict) -> Tuple[Scenario, SimConfig]:
    """Turn a simulation request body into library inputs.

    Raises ValueError on anything malformed; the job runner surfaces that as
    a Failed status rather than a rejected submission.
    """
    ei = EquivalenceInterval(
        payload["p_target"], payload["eps_lo"], payload["eps_hi"]
    )
    if payload.get("scenario") is not None:
        raw = payload["scenario"]
        scenario = Scenario(
            str(raw.get("id", "custom")), raw["p_target"], tuple(raw["true_tox"])
        )
    elif payload.get("builtin"):
        scenario = select_builtin(f"builtin:{payload['builtin']}")[0]
    else:
        raise ValueError("either scenario or builtin must be provided")
    cohort = payload.get("cohort_size", 3)
    cfg = SimConfig(
        design=payload["design"],
        ei=ei,
        max_patients=payload.get("max_patients", 30),
        cohort_size=cohort,
        n_trials=payload.get("n_trials", 1000),
        seed=payload.get("seed", 0),
        consecutive_stop_m=payload.get("consecutive_stop_m"),
        truncate_final_cohort=payload.get("truncate_final_cohort", False),
    )
    return scenario, cfg


class JobStore:
    """Simulation jobs: bounded worker pool, results persisted as JSON."""

    def __init__(self, data_dir: Union[str, Path], workers: int = 2) -> None:
        self.dir = Path(data_dir) / "jobs"
        self.dir.mkdir(parents=True, exist_ok=True)
        self._pool = ThreadPoolExecutor(max_workers=max(1, workers))
        self._lock = threading.Lock()
        self._jobs: Dict[str, dict] = {}
        for path in sorted(self.dir.glob("*.json")):
            try:
                job = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError):
                continue
            # A job that was mid-flight when the process died can never
            # complete; say so instead of reporting Running forever.
            if job.get("status") in (QUEUED, RUNNING):
                job["status"] = FAILED
                job["error"] = "interrupted by service restart"
                self._persist(job)
            self._jobs[job["id"]] = job

    def _persist(self, job: dict) -> None:
        path = self.dir / f"{job['id']}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(job, sort_keys=True, indent=2))
        tmp.replace(path)

    def submit(self, payload: dict) -> dict:
        job = {
            "id": uuid.uuid4().hex,
            "status": QUEUED,
            "submitted": _now(),
            "request": payload,
        }
        with self._lock:
            self._jobs[job["id"]] = job
            self._persist(job)
        self._pool.submit(self._run, job["id"])
        return job

    def get(self, job_id: str) -> Optional[dict]:
        with self._lock:
            job = self._jobs.get(job_id)
            return dict(job) if job is not None else None

    def _run(self, job_id: str) -> None:
        with self._lock:
            job = self._jobs[job_id]
            job["status"] = RUNNING
            self._persist(job)
            payload = job["request"]
        try:
            scenario, cfg = build_sim_inputs(payload)
            result = run_simulation(scenario, cfg).as_dict()
        except Exception as exc:  # job failure is a result, not a crash
            with self._lock:
                job = self._jobs[job_id]
                job["status"] = FAILED
                job["error"] = str(exc)
                self._persist(job)
            return
        with self._lock:
            job = self._jobs[job_id]
            job["status"] = DONE
            job["result"] = result
            job["finished"] = _now()
            self._persist(job)

    def shutdown(self) -> None:
        self._pool.shutdown(wait=False)
