"""Decision tables: the frozen reference grid, serialization stability, and
generation contract."""

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from dosefind import (
    DecisionTable,
    EquivalenceInterval,
    MAX_TABLE_N,
    SafetyConfig,
    generate_table,
)

from oracles import REFERENCE_TABLE

PT03 = EquivalenceInterval(Fraction(3, 10), Fraction(1, 20), Fraction(1, 20))
PT017 = EquivalenceInterval(Fraction(17, 100), Fraction(1, 20), Fraction(1, 20))


def test_reference_table_cell_for_cell():
    """Every letter of the published target-0.3 grid, n <= 15: 135 cells."""
    table = generate_table("i3p3", PT03, 15)
    assert len(table.cells) == len(REFERENCE_TABLE) == 135
    mismatches = {
        k: (table.cells[k], want)
        for k, want in REFERENCE_TABLE.items()
        if table.cells[k] != want
    }
    assert mismatches == {}


def test_named_unacceptable_cells():
    table = generate_table("i3p3", PT03, 15)
    for n, x in ((2, 2), (3, 3), (6, 4), (4, 4), (8, 8)):
        assert table.letter(n, x) == "DU", (n, x)
    # rule algebra puts these just on the acceptable side
    assert table.letter(15, 6) == "D"
    assert table.letter(11, 4) == "D"


def test_smaller_table_is_a_restriction():
    """The n <= 9 table is exactly the n <= 15 table restricted."""
    small = generate_table("i3p3", PT03, 9)
    assert small.cells == {
        (n, x): letter for (n, x), letter in REFERENCE_TABLE.items() if n <= 9
    }


def test_case_two_interval_column():
    """Target 0.17, three patients.  The raw rule directions are E, S, D, D,
    but the safety overlay flags both high-toxicity cells: at such a low
    target, two DLTs in three patients already clears the 0.95 posterior
    bar (tail = 0.9829), so the published letters are E, S, DU, DU."""
    table = generate_table("i3p3", PT017, 3)
    assert table.letter(3, 0) == "E"
    assert table.letter(3, 1) == "S"
    assert table.letter(3, 2) == "DU"
    assert table.letter(3, 3) == "DU"


def test_boundary_design_table_shares_du_overlay():
    interval = generate_table("i3p3", PT03, 12)
    boundary = generate_table("boin", PT03, 12)
    for key, letter in interval.cells.items():
        assert (letter == "DU") == (boundary.cells[key] == "DU"), key


def test_boundary_design_differs_inside_the_grid():
    """The two designs are distinct rules: their letters must differ
    somewhere (the straddle cells)."""
    interval = generate_table("i3p3", PT03, 12)
    boundary = generate_table("boin", PT03, 12)
    assert interval.cells != boundary.cells
    # 2/5 = 0.4 >= 0.35 de-escalates under fixed boundaries, stays under the
    # interval rule's straddle clause
    assert interval.letter(5, 2) == "S"
    assert boundary.letter(5, 2) == "D"


def test_generate_table_validation():
    with pytest.raises(ValueError):
        generate_table("3p3", PT03, 10)
    with pytest.raises(ValueError):
        generate_table("i3p3", PT03, 0)
    with pytest.raises(ValueError):
        generate_table("i3p3", PT03, MAX_TABLE_N + 1)


def test_csv_layout():
    table = generate_table("i3p3", PT03, 2)
    assert table.to_csv() == (
        "n,x,decision\n"
        "1,0,E\n"
        "1,1,S\n"
        "2,0,E\n"
        "2,1,S\n"
        "2,2,DU\n"
    )


def test_json_and_csv_carry_identical_cells():
    table = generate_table("i3p3", PT03, 15)
    payload = json.loads(table.to_json())
    from_json = {(c["n"], c["x"]): c["decision"] for c in payload["cells"]}
    from_csv = {}
    lines = table.to_csv().strip().splitlines()
    assert lines[0] == "n,x,decision"
    for line in lines[1:]:
        n, x, letter = line.split(",")
        from_csv[(int(n), int(x))] = letter
    assert from_json == from_csv == table.cells
    assert payload["p_target"] == 0.3
    assert payload["max_n"] == 15


def test_serialization_bytes_stable_across_processes():
    """Same parameters in a fresh interpreter give byte-identical CSV and
    JSON."""
    prog = (
        "from fractions import Fraction\n"
        "from dosefind import EquivalenceInterval, generate_table\n"
        "ei = EquivalenceInterval(Fraction(3,10), Fraction(1,20), Fraction(1,20))\n"
        "t = generate_table('i3p3', ei, 15)\n"
        "import sys; sys.stdout.write(t.to_csv()); sys.stdout.write(t.to_json())\n"
    )
    runs = [
        subprocess.run(
            [sys.executable, "-c", prog], capture_output=True, text=True, check=True
        ).stdout
        for _ in range(2)
    ]
    here = generate_table("i3p3", PT03, 15)
    assert runs[0] == runs[1] == here.to_csv() + here.to_json()


def test_custom_safety_prior_changes_overlay():
    """The overlay must follow the configured prior, cell for cell.

    Under the near-point-mass Beta(0.005, 0.005) prior one observed DLT in
    one patient is already damning (posterior mass piles up near 1), while
    five DLTs in nine patients is *less* alarming than under the uniform
    prior.  Both flips are pinned, and every cell of the custom table must
    agree with the veto rule evaluated under the custom prior."""
    from dosefind import BetaParams, DoseOutcome, safety_veto

    sharp_cfg = SafetyConfig(prior=BetaParams(0.005, 0.005))
    default = generate_table("i3p3", PT03, 15)
    sharper = generate_table("i3p3", PT03, 15, safety=sharp_cfg)

    assert default.letter(1, 1) == "S"
    assert sharper.letter(1, 1) == "DU"
    assert default.letter(9, 5) == "DU"
    assert sharper.letter(9, 5) == "D"

    pt = PT03.p_target
    for (n, x), letter in sharper.cells.items():
        vetoed = safety_veto(DoseOutcome(n_treated=n, n_dlt=x), pt, sharp_cfg)
        assert (letter == "DU") == vetoed, (n, x)
