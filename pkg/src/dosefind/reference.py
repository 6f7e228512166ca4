"""Frozen comparator columns for two worked single-dose examples.

These are static display data: the published next-dose choices of two older
interval designs (labelled "mtpi" and "mtpi2" here) alongside the interval
rule this package implements, at the two (target, enrolled) settings where
the designs visibly disagree.  Verdict letters are E / S / D.  The engines of
the two comparators are deliberately not implemented; only their published
columns are shipped, for side-by-side display and for pinning the cells where
the implemented rule must differ from them.
"""

from __future__ import annotations

from .rules import EquivalenceInterval

#: Case keyed by label: interval, patients enrolled at the dose, and the
#: decision letters for x = 0..n under each design.
WORKED_CASES = {
    "case1": {
        "ei": EquivalenceInterval(0.3, 0.05, 0.05),
        "n": 6,
        "columns": {
            "i3p3": ("E", "E", "S", "D", "D", "D", "D"),
            "mtpi": ("E", "E", "S", "S", "D", "D", "D"),
            "mtpi2": ("E", "E", "S", "D", "D", "D", "D"),
        },
    },
    "case2": {
        "ei": EquivalenceInterval(0.17, 0.05, 0.05),
        "n": 3,
        "columns": {
            "i3p3": ("E", "S", "D", "D"),
            "mtpi": ("E", "S", "D", "D"),
            "mtpi2": ("E", "D", "D", "D"),
        },
    },
}
