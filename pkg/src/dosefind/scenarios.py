"""True-toxicity scenarios for simulation.

A scenario is a target rate plus one true DLT probability per dose.  The 42
built-in scenarios are the standard benchmark set for six-dose trials at
targets 0.1, 0.17 and 0.3 (14 scenarios per target).  True probabilities are
kept as exact decimals so classifying them against interval bounds (e.g. a
true rate exactly on the lower bound) never depends on float rounding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

from .rules import EquivalenceInterval, RateLike, Region, as_fraction, classify_vs_interval


@dataclass(frozen=True)
class Scenario:
    id: str
    p_target: Fraction
    true_tox: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_target", as_fraction(self.p_target))
        object.__setattr__(
            self, "true_tox", tuple(as_fraction(p) for p in self.true_tox)
        )
        if len(self.true_tox) < 1:
            raise ValueError("a scenario needs at least one dose")
        if any(not 0 <= p <= 1 for p in self.true_tox):
            raise ValueError("true toxicity probabilities must lie in [0, 1]")
        if not 0 < self.p_target < 1:
            raise ValueError("p_target must be in (0, 1)")

    @property
    def n_doses(self) -> int:
        return len(self.true_tox)


# The benchmark set: (p_target, per-dose true DLT probabilities) as decimal
# strings, ids "1".."42".  Scenarios 1-14 target 0.1, 15-28 target 0.17,
# 29-42 target 0.3.
_BUILTIN_ROWS: Sequence[Tuple[str, Sequence[str]]] = (
    ("0.1", ("0.04", "0.05", "0.06", "0.07", "0.08", "0.09")),
    ("0.1", ("0.15", "0.2", "0.25", "0.3", "0.35", "0.4")),
    ("0.1", ("0.01", "0.1", "0.2", "0.25", "0.3", "0.35")),
    ("0.1", ("0.01", "0.02", "0.03", "0.04", "0.1", "0.25")),
    ("0.1", ("0.05", "0.4", "0.5", "0.6", "0.65", "0.7")),
    ("0.1", ("0.01", "0.03", "0.05", "0.4", "0.5", "0.6")),
    ("0.1", ("0.01", "0.02", "0.03", "0.04", "0.05", "0.4")),
    ("0.1", ("0.09", "0.11", "0.13", "0.15", "0.17", "0.19")),
    ("0.1", ("0.05", "0.07", "0.09", "0.11", "0.13", "0.15")),
    ("0.1", ("0.01", "0.03", "0.05", "0.07", "0.09", "0.11")),
    ("0.1", ("0.02", "0.04", "0.08", "0.12", "0.17", "0.25")),
    ("0.1", ("0.02", "0.04", "0.07", "0.1", "0.15", "0.2")),
    ("0.1", ("0.1", "0.15", "0.2", "0.25", "0.3", "0.35")),
    ("0.1", ("0.01", "0.03", "0.05", "0.06", "0.08", "0.1")),
    ("0.17", ("0", "0.02", "0.05", "0.08", "0.11", "0.14")),
    ("0.17", ("0.22", "0.32", "0.37", "0.47", "0.57", "0.67")),
    ("0.17", ("0", "0.17", "0.37", "0.57", "0.77", "0.92")),
    ("0.17", ("0.01", "0.03", "0.05", "0.07", "0.17", "0.47")),
    ("0.17", ("0.02", "0.47", "0.77", "0.87", "0.92", "0.96")),
    ("0.17", ("0", "0.02", "0.07", "0.47", "0.67", "0.87")),
    ("0.17", ("0", "0", "0.04", "0.07", "0.12", "0.67")),
    ("0.17", ("0.16", "0.18", "0.2", "0.22", "0.24", "0.26")),
    ("0.17", ("0.12", "0.14", "0.16", "0.18", "0.2", "0.22")),
    ("0.17", ("0.08", "0.1", "0.12", "0.14", "0.16", "0.18")),
    ("0.17", ("0.02", "0.08", "0.14", "0.2", "0.26", "0.32")),
    ("0.17", ("0.02", "0.07", "0.12", "0.17", "0.27", "0.34")),
    ("0.17", ("0.17", "0.22", "0.27", "0.32", "0.37", "0.42")),
    ("0.17", ("0.02", "0.05", "0.08", "0.11", "0.14", "0.17")),
    ("0.3", ("0.02", "0.05", "0.1", "0.15", "0.2", "0.25")),
    ("0.3", ("0.35", "0.45", "0.5", "0.6", "0.7", "0.8")),
    ("0.3", ("0.01", "0.3", "0.55", "0.65", "0.8", "0.95")),
    ("0.3", ("0.04", "0.06", "0.08", "0.1", "0.3", "0.6")),
    ("0.3", ("0.05", "0.6", "0.8", "0.9", "0.95", "0.99")),
    ("0.3", ("0.01", "0.05", "0.1", "0.6", "0.7", "0.9")),
    ("0.3", ("0.01", "0.03", "0.07", "0.1", "0.15", "0.75")),
    ("0.3", ("0.29", "0.31", "0.33", "0.35", "0.37", "0.39")),
    ("0.3", ("0.25", "0.27", "0.29", "0.31", "0.33", "0.35")),
    ("0.3", ("0.21", "0.23", "0.25", "0.27", "0.29", "0.31")),
    ("0.3", ("0.05", "0.2", "0.27", "0.33", "0.39", "0.45")),
    ("0.3", ("0.05", "0.1", "0.2", "0.3", "0.4", "0.4")),
    ("0.3", ("0.3", "0.35", "0.4", "0.45", "0.5", "0.55")),
    ("0.3", ("0.15", "0.18", "0.21", "0.24", "0.27", "0.3")),
)


def builtin_scenarios() -> List[Scenario]:
    """The 42 benchmark scenarios, ids "1" through "42"."""
    return [
        Scenario(str(i + 1), pt, tuple(tox))
        for i, (pt, tox) in enumerate(_BUILTIN_ROWS)
    ]


def select_builtin(selector: str) -> List[Scenario]:
    """Resolve a builtin:... selector to scenarios.

    Selectors: builtin:all, builtin:pt0.1, builtin:pt0.17, builtin:pt0.3,
    or builtin:<id> for a single scenario by its id.
    """
    if not selector.startswith("builtin:"):
        raise ValueError(f"not a builtin selector: {selector!r}")
    key = selector[len("builtin:"):]
    everything = builtin_scenarios()
    if key == "all":
        return everything
    if key.startswith("pt"):
        want = as_fraction(key[2:])
        chosen = [s for s in everything if s.p_target == want]
        if not chosen:
            raise ValueError(f"no builtin scenarios with target {key[2:]}")
        return chosen
    for s in everything:
        if s.id == key:
            return [s]
    raise ValueError(f"unknown builtin scenario selector: {selector!r}")


def scenarios_to_json(scenarios: Iterable[Scenario]) -> str:
    payload = {
        "scenarios": [
            {
                "id": s.id,
                "p_target": float(s.p_target),
                "true_tox": [float(p) for p in s.true_tox],
            }
            for s in scenarios
        ]
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def scenarios_from_json(text: str) -> List[Scenario]:
    raw = json.loads(text)
    rows = raw["scenarios"] if isinstance(raw, dict) else raw
    out = []
    for row in rows:
        out.append(
            Scenario(
                str(row["id"]),
                row["p_target"],
                tuple(row["true_tox"]),
            )
        )
    if not out:
        raise ValueError("scenario file contains no scenarios")
    return out


def true_mtd_set(scenario: Scenario, ei: EquivalenceInterval) -> "set[int]":
    """Doses whose true rate lies inside the interval; failing that, the
    highest dose with true rate strictly below the target; failing that,
    empty (every dose is too toxic and any selection would be wrong)."""
    inside = {
        d + 1
        for d, p in enumerate(scenario.true_tox)
        if classify_vs_interval(p, ei) is Region.INSIDE
    }
    if inside:
        return inside
    below = [d + 1 for d, p in enumerate(scenario.true_tox) if p < ei.p_target]
    if below:
        return {max(below)}
    return set()
