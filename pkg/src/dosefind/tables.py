"""Decision-table generation.

A decision table enumerates the per-cohort verdict letter for every (n, x)
cell with 1 <= n <= max_n, 0 <= x <= n.  The letter is dose-position-agnostic
(E / S / D straight from the rule) with an overlay: any cell whose posterior
probability of exceeding the target crosses the safety threshold is marked
"DU" -- at such a cell the dose is unacceptable, it is de-escalated from and
permanently dropped (at dose 1 the whole trial stops).

Tables are pure functions of (design, interval, max_n, safety config), and
both serializations (CSV and JSON) are byte-stable across processes and
platforms: cell computation is exact rational arithmetic plus a
double-precision tail probability, and encoding never touches dicts with
nondeterministic order.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .bayes import SafetyConfig, safety_veto
from .rules import (
    BoinBoundaries,
    DoseOutcome,
    EquivalenceInterval,
    boin_decision,
    i3p3_raw,
    DoseIndex,
)

MAX_TABLE_N = 100

#: Designs that have a data-independent decision table.
TABLE_DESIGNS = ("i3p3", "boin")


@dataclass(frozen=True)
class DecisionTable:
    design: str
    ei: EquivalenceInterval
    max_n: int
    cells: Dict[Tuple[int, int], str] = field(repr=False)

    def letter(self, n: int, x: int) -> str:
        return self.cells[(n, x)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,x,decision\n")
        for n in range(1, self.max_n + 1):
            for x in range(n + 1):
                buf.write(f"{n},{x},{self.cells[(n, x)]}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "design": self.design,
            "p_target": float(self.ei.p_target),
            "eps_lo": float(self.ei.eps_lo),
            "eps_hi": float(self.ei.eps_hi),
            "max_n": self.max_n,
            "cells": [
                {"n": n, "x": x, "decision": self.cells[(n, x)]}
                for n in range(1, self.max_n + 1)
                for x in range(n + 1)
            ],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def generate_table(
    design: str,
    ei: EquivalenceInterval,
    max_n: int,
    safety: Optional[SafetyConfig] = None,
) -> DecisionTable:
    """Enumerate the decision letter for every (n, x) cell.

    design is "i3p3" (interval rule) or "boin" (fixed boundaries derived from
    the interval's target).  Both carry the DU overlay.
    """
    if design not in TABLE_DESIGNS:
        raise ValueError(
            f"no decision table for design {design!r}; valid: {', '.join(TABLE_DESIGNS)}"
        )
    if not 1 <= max_n <= MAX_TABLE_N:
        raise ValueError(f"max_n must be in 1..{MAX_TABLE_N}, got {max_n}")
    cfg = safety if safety is not None else SafetyConfig()
    bounds = BoinBoundaries.from_target(ei.p_target) if design == "boin" else None
    # A mid-ladder dose position keeps apply_dose_boundaries from clamping,
    # so the letter reflects the rule itself, not the dose's position.
    mid = DoseIndex(2, 3)
    cells: Dict[Tuple[int, int], str] = {}
    for n in range(1, max_n + 1):
        for x in range(n + 1):
            outcome = DoseOutcome(n, x)
            if safety_veto(outcome, ei.p_target, cfg):
                cells[(n, x)] = "DU"
            elif design == "boin":
                cells[(n, x)] = boin_decision(outcome, bounds, mid).verdict.value
            else:
                cells[(n, x)] = i3p3_raw(outcome, ei).value
    return DecisionTable(design, ei, max_n, cells)
