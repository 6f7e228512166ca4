"""Live trial-conduct service: session management over HTTP with durable
event logs, plus decision tables and background simulation jobs."""

from .app import create_app
from .store import JobStore, Session, SessionConfig, SessionStore, build_session_config

__all__ = [
    "JobStore",
    "Session",
    "SessionConfig",
    "SessionStore",
    "build_session_config",
    "create_app",
]
