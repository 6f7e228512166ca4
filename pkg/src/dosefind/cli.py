"""Command-line front door.

Everything the library can do without the HTTP service: decision tables,
one-shot next-dose queries, simulation reports, design comparisons, scenario
export, sensitivity sweeps — plus ``serve``, which launches the service so a
single executable ships the whole toolkit.

Every subcommand is a thin adapter: it parses flags, calls the same library
functions a Python caller would use, and formats the result.  Output for a
given seed is byte-identical across runs.  Exit codes: 0 success, 1 runtime
failure (unreadable or malformed files, mid-run errors), 2 usage errors (bad
flags or flag values).
"""

from __future__ import annotations

import dataclasses
import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import click

from .model_based import BlrmConfig, BlrmHyper, CrmConfig
from .rules import EquivalenceInterval
from .scenarios import (
    Scenario,
    as_fraction,
    scenarios_from_json,
    scenarios_to_json,
    select_builtin,
    true_mtd_set,
)
from .simulate import (
    DESIGNS,
    OperatingCharacteristics,
    SimConfig,
    StopKind,
    SweepRow,
    TrialState,
    make_policy,
    run_simulation,
    sensitivity_sweep,
)
from .tables import TABLE_DESIGNS, generate_table

_SELECTOR_HINT = (
    "builtin:all, builtin:pt0.1, builtin:pt0.17, builtin:pt0.3, builtin:<id>, "
    "or a path to a scenario JSON file"
)


# --------------------------------------------------------------------------
# flag parsing helpers


def _fraction(value: str, flag: str) -> Fraction:
    """Parse a rate flag exactly: '0.3' and '3/10' both become 3/10."""
    try:
        out = as_fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise click.UsageError(f"invalid {flag} {value!r}: {exc}")
    return out


def _interval(pt: str, eps_lo: str, eps_hi: str) -> EquivalenceInterval:
    try:
        return EquivalenceInterval(
            _fraction(pt, "--pt"),
            _fraction(eps_lo, "--eps-lo"),
            _fraction(eps_hi, "--eps-hi"),
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _parse_designs(raw: str) -> List[str]:
    names = [piece.strip() for piece in raw.split(",") if piece.strip()]
    if not names:
        raise click.UsageError(
            "no designs given; valid designs: " + ", ".join(DESIGNS)
        )
    chosen: List[str] = []
    for name in names:
        if name not in DESIGNS:
            raise click.UsageError(
                f"unknown design {name!r}; valid designs: " + ", ".join(DESIGNS)
            )
        if name not in chosen:
            chosen.append(name)
    return chosen


def _load_scenarios(source: str) -> List[Scenario]:
    if source.startswith("builtin:"):
        try:
            return select_builtin(source)
        except ValueError as exc:
            raise click.UsageError(f"{exc}; valid selectors: {_SELECTOR_HINT}")
    path = Path(source)
    if not path.exists():
        raise click.UsageError(
            f"scenario source {source!r} is neither a builtin selector nor an "
            f"existing file; expected {_SELECTOR_HINT}"
        )
    try:
        return scenarios_from_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise click.ClickException(f"cannot read scenario file {source}: {exc}")
    except (ValueError, KeyError, TypeError) as exc:
        raise click.ClickException(f"malformed scenario file {source}: {exc}")


def _read_json_file(path: str, what: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise click.ClickException(f"cannot read {what} {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"{what} {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise click.ClickException(f"{what} {path} must be a JSON object")
    return data


def _crm_from_file(
    path: Optional[str], pt: Fraction, n_doses: int
) -> Optional[CrmConfig]:
    """Power-model config file: JSON object, keys 'skeleton' (list of rates),
    'log_theta_prior_mean', 'log_theta_prior_var'; missing keys keep the
    per-target defaults."""
    if path is None:
        return None
    data = _read_json_file(path, "power-model config")
    allowed = {"skeleton", "log_theta_prior_mean", "log_theta_prior_var"}
    unknown = set(data) - allowed - {"_comment"}
    if unknown:
        raise click.ClickException(
            f"power-model config {path}: unknown keys {sorted(unknown)}; "
            f"allowed: {sorted(allowed)}"
        )
    kwargs: Dict[str, object] = {}
    if "skeleton" in data:
        kwargs["skeleton"] = tuple(float(v) for v in data["skeleton"])
    for key in ("log_theta_prior_mean", "log_theta_prior_var"):
        if key in data:
            kwargs[key] = float(data[key])
    try:
        return dataclasses.replace(CrmConfig.default(pt, n_doses), **kwargs)
    except (ValueError, TypeError) as exc:
        raise click.ClickException(f"power-model config {path}: {exc}")


def _blrm_from_file(
    path: Optional[str], pt: Fraction, n_doses: int
) -> Optional[BlrmConfig]:
    """Logistic-model config file: JSON object, keys 'raw_doses', 'ref_dose',
    'eps_lo', 'eps_hi', 'p_ewoc', 'literal_shifted_interval', and 'hyper'
    (object with mu1, mu2, sigma1, sigma2, rho); missing keys keep defaults."""
    if path is None:
        return None
    data = _read_json_file(path, "logistic-model config")
    allowed = {
        "raw_doses",
        "ref_dose",
        "eps_lo",
        "eps_hi",
        "p_ewoc",
        "literal_shifted_interval",
        "hyper",
    }
    unknown = set(data) - allowed - {"_comment"}
    if unknown:
        raise click.ClickException(
            f"logistic-model config {path}: unknown keys {sorted(unknown)}; "
            f"allowed: {sorted(allowed)}"
        )
    kwargs: Dict[str, object] = {}
    if "raw_doses" in data:
        kwargs["raw_doses"] = tuple(float(v) for v in data["raw_doses"])
    if "ref_dose" in data:
        kwargs["ref_dose"] = float(data["ref_dose"])
    for key in ("eps_lo", "eps_hi"):
        if key in data:
            kwargs[key] = as_fraction(str(data[key]))
    if "p_ewoc" in data:
        kwargs["p_ewoc"] = float(data["p_ewoc"])
    if "literal_shifted_interval" in data:
        kwargs["literal_shifted_interval"] = bool(data["literal_shifted_interval"])
    if "hyper" in data:
        hyper = data["hyper"]
        if not isinstance(hyper, dict):
            raise click.ClickException(
                f"logistic-model config {path}: 'hyper' must be an object"
            )
        try:
            kwargs["hyper"] = BlrmHyper(**{k: float(v) for k, v in hyper.items()})
        except (TypeError, ValueError) as exc:
            raise click.ClickException(f"logistic-model config {path}: {exc}")
    try:
        return dataclasses.replace(BlrmConfig.default(pt, n_doses), **kwargs)
    except (ValueError, TypeError) as exc:
        raise click.ClickException(f"logistic-model config {path}: {exc}")


def _parse_cohort_size(raw: str) -> Union[int, str]:
    if raw == "random":
        return raw
    try:
        return int(raw)
    except ValueError:
        raise click.UsageError(
            f"invalid --cohort-size {raw!r}: expected an integer or 'random'"
        )


def _emit(text: str, out: Optional[str]) -> None:
    body = text if text.endswith("\n") else text + "\n"
    if out is None:
        click.echo(body, nl=False)
    else:
        try:
            Path(out).write_text(body, encoding="utf-8")
        except OSError as exc:
            raise click.ClickException(f"cannot write {out}: {exc}")


# --------------------------------------------------------------------------
# report rendering


def _grid_row(label: str, cells: Sequence[str], tail: str = "") -> str:
    return f"  {label:<18s}" + "".join(f"{c:>8s}" for c in cells) + tail


def _render_oc(design: str, oc: OperatingCharacteristics) -> List[str]:
    lines = [f"  [{design}]"]
    lines.append(
        _grid_row(
            "selection prob.",
            [f"{v:.3f}" for v in oc.selection_prob],
            f"   none: {oc.prob_no_selection:.3f}",
        )
    )
    lines.append(
        _grid_row("patients treated", [f"{v:.2f}" for v in oc.mean_patients])
    )
    lines.append(
        _grid_row("toxicities", [f"{v:.2f}" for v in oc.mean_toxicities])
    )
    lines.append(
        f"  correct selection {oc.pcs:.3f} | selection above MTD "
        f"{oc.prob_over_mtd:.3f} | patients at/below MTD {oc.safety:.3f}"
    )
    lines.append(
        f"  observed DLT rate {oc.pct_toxicity:.3f} | no selection "
        f"{oc.prob_no_selection:.3f}"
    )
    return lines


def _render_report(
    scenarios: Sequence[Scenario],
    designs: Sequence[str],
    results: Dict[Tuple[int, str], OperatingCharacteristics],
    eps_lo: Fraction,
    eps_hi: Fraction,
    n_trials: int,
    seed: int,
) -> str:
    lines = [
        f"{len(scenarios)} scenario(s) x {len(designs)} design(s), "
        f"{n_trials} trials each, seed {seed}"
    ]
    for i, sc in enumerate(scenarios):
        ei = EquivalenceInterval(sc.p_target, eps_lo, eps_hi)
        mtd = sorted(true_mtd_set(sc, ei))
        lines.append("")
        lines.append(
            f"Scenario {sc.id}  (target {float(sc.p_target):g}, "
            f"interval [{float(ei.lower):g}, {float(ei.upper):g}])"
        )
        lines.append(
            _grid_row("true toxicity", [f"{float(p):.3f}" for p in sc.true_tox])
        )
        if mtd:
            lines.append("  true MTD set: {" + ", ".join(map(str, mtd)) + "}")
        else:
            lines.append("  true MTD set: empty (every dose is above the target)")
        for design in designs:
            lines.extend(_render_oc(design, results[(i, design)]))
    return "\n".join(lines) + "\n"


def _report_json(
    scenarios: Sequence[Scenario],
    designs: Sequence[str],
    results: Dict[Tuple[int, str], OperatingCharacteristics],
    eps_lo: Fraction,
    eps_hi: Fraction,
    n_trials: int,
    seed: int,
) -> str:
    blocks = []
    for i, sc in enumerate(scenarios):
        ei = EquivalenceInterval(sc.p_target, eps_lo, eps_hi)
        blocks.append(
            {
                "id": sc.id,
                "p_target": float(sc.p_target),
                "true_tox": [float(p) for p in sc.true_tox],
                "mtd_set": sorted(true_mtd_set(sc, ei)),
                "designs": {
                    design: results[(i, design)].as_dict() for design in designs
                },
            }
        )
    payload = {
        "n_trials": n_trials,
        "seed": seed,
        "eps_lo": float(eps_lo),
        "eps_hi": float(eps_hi),
        "scenarios": blocks,
    }
    return json.dumps(payload, indent=2) + "\n"


def _run_report(
    designs: List[str],
    scenarios: List[Scenario],
    eps_lo: Fraction,
    eps_hi: Fraction,
    n_trials: int,
    seed: int,
    max_patients: int,
    cohort_size: Union[int, str],
    consecutive_stop: Optional[int],
    truncate_final_cohort: bool,
    crm_file: Optional[str],
    blrm_file: Optional[str],
    fmt: str,
    out: Optional[str],
) -> None:
    results: Dict[Tuple[int, str], OperatingCharacteristics] = {}
    for i, sc in enumerate(scenarios):
        try:
            ei = EquivalenceInterval(sc.p_target, eps_lo, eps_hi)
        except ValueError as exc:
            raise click.UsageError(f"scenario {sc.id}: {exc}")
        crm = (
            _crm_from_file(crm_file, sc.p_target, sc.n_doses)
            if "crm" in designs
            else None
        )
        blrm = (
            _blrm_from_file(blrm_file, sc.p_target, sc.n_doses)
            if "blrm" in designs
            else None
        )
        for design in designs:
            try:
                cfg = SimConfig(
                    design=design,
                    ei=ei,
                    max_patients=max_patients,
                    cohort_size=cohort_size,
                    n_trials=n_trials,
                    seed=seed,
                    consecutive_stop_m=consecutive_stop,
                    truncate_final_cohort=truncate_final_cohort,
                    crm=crm if design == "crm" else None,
                    blrm=blrm if design == "blrm" else None,
                )
            except ValueError as exc:
                raise click.UsageError(str(exc))
            try:
                results[(i, design)] = run_simulation(sc, cfg)
            except ValueError as exc:
                raise click.ClickException(f"scenario {sc.id}, {design}: {exc}")
    render = _report_json if fmt == "json" else _render_report
    _emit(
        render(scenarios, designs, results, eps_lo, eps_hi, n_trials, seed), out
    )


# --------------------------------------------------------------------------
# the command group


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="dosefind")
def main() -> None:
    """Dose-finding designs: tables, decisions, simulations, and the service."""


@main.command("table")
@click.option(
    "--design",
    type=click.Choice(TABLE_DESIGNS),
    default="i3p3",
    show_default=True,
    help="Which design's decision table to generate.",
)
@click.option("--pt", required=True, help="Target toxicity rate, e.g. 0.3 or 3/10.")
@click.option("--eps-lo", default="0.05", show_default=True, help="Interval half-width below the target.")
@click.option("--eps-hi", default="0.05", show_default=True, help="Interval half-width above the target.")
@click.option(
    "--max-n",
    type=click.IntRange(min=1),
    default=15,
    show_default=True,
    help="Largest per-dose sample size (table column count).",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json"]),
    default="csv",
    show_default=True,
    help="Output encoding; both carry identical cells.",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write to a file instead of stdout.")
def cmd_table(design: str, pt: str, eps_lo: str, eps_hi: str, max_n: int, fmt: str, out: Optional[str]) -> None:
    """Print the pre-trial decision table: one cell per (n treated, x DLTs)."""
    ei = _interval(pt, eps_lo, eps_hi)
    try:
        table = generate_table(design, ei, max_n)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(table.to_json() if fmt == "json" else table.to_csv(), out)


@main.command("next")
@click.option(
    "--design",
    type=click.Choice(DESIGNS),
    default="i3p3",
    show_default=True,
    help="Design whose rule decides the next dose.",
)
@click.option("--pt", required=True, help="Target toxicity rate.")
@click.option("--eps-lo", default="0.05", show_default=True)
@click.option("--eps-hi", default="0.05", show_default=True)
@click.option("--n", "n_treated", type=int, default=None, help="Patients treated at the current dose (cumulative).")
@click.option("--x", "n_dlt", type=int, default=None, help="DLTs observed at the current dose (cumulative).")
@click.option("--dose", type=int, required=True, help="Current dose level (1-based).")
@click.option("--n-doses", type=int, default=None, help="Number of dose levels [default: history file length, else 6].")
@click.option(
    "--history-file",
    type=click.Path(dir_okay=False),
    default=None,
    help="JSON file with per-dose cumulative data: a list of {\"n\": .., \"x\": ..}, lowest dose first. Supplies neighbor-dose data for the escalation safety check and full data for the model-based designs.",
)
@click.option("--last-size", type=int, default=0, show_default=True, help="Size of the most recent cohort (power-model escalation guard).")
@click.option("--last-x", type=int, default=0, show_default=True, help="DLTs in the most recent cohort (power-model escalation guard).")
def cmd_next(
    design: str,
    pt: str,
    eps_lo: str,
    eps_hi: str,
    n_treated: Optional[int],
    n_dlt: Optional[int],
    dose: int,
    n_doses: Optional[int],
    history_file: Optional[str],
    last_size: int,
    last_x: int,
) -> None:
    """Print the decision for one cohort: verdict letter and next dose."""
    ei = _interval(pt, eps_lo, eps_hi)
    entries: List[Tuple[int, int]] = []
    if history_file is not None:
        raw = _read_json_history(history_file)
        entries = raw
        if n_doses is None:
            n_doses = len(entries)
        elif n_doses != len(entries):
            raise click.UsageError(
                f"--n-doses {n_doses} disagrees with the history file "
                f"({len(entries)} doses)"
            )
    if n_doses is None:
        n_doses = 6
    if n_doses < 1:
        raise click.UsageError("--n-doses must be at least 1")
    if not 1 <= dose <= n_doses:
        raise click.UsageError(f"--dose must be between 1 and {n_doses}")
    state = TrialState(n_doses)
    for i, (h_n, h_x) in enumerate(entries):
        state.n[i], state.x[i] = h_n, h_x
    if n_treated is None and not entries:
        raise click.UsageError("--n is required without --history-file")
    if n_treated is not None:
        if n_dlt is None:
            raise click.UsageError("--x is required when --n is given")
        state.n[dose - 1], state.x[dose - 1] = n_treated, n_dlt
    elif n_dlt is not None:
        raise click.UsageError("--n is required when --x is given")
    cur_n, cur_x = state.n[dose - 1], state.x[dose - 1]
    if cur_n < 1:
        raise click.UsageError("no patients treated at the current dose yet")
    if not 0 <= cur_x <= cur_n:
        raise click.UsageError(
            f"DLT count {cur_x} must lie between 0 and the {cur_n} treated"
        )
    if not (0 <= last_x <= last_size):
        raise click.UsageError("--last-x must lie between 0 and --last-size")
    state.current = dose
    try:
        policy = make_policy(design, n_doses, ei)
        decision = policy.decide(state, last_size, last_x)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if decision.stop is StopKind.SAFETY:
        line = f"{decision.verdict.value} → stop the trial: no dose is acceptably safe"
    elif decision.stop is StopKind.DESIGN:
        line = f"{decision.verdict.value} → stop; select dose {decision.selection}"
    else:
        line = f"{decision.verdict.value} → dose {decision.next_dose}"
    click.echo(line)


def _read_json_history(path: str) -> List[Tuple[int, int]]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise click.ClickException(f"cannot read history file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"history file {path} is not valid JSON: {exc}")
    if isinstance(data, dict) and "doses" in data:
        data = data["doses"]
    if not isinstance(data, list) or not data:
        raise click.ClickException(
            f"history file {path}: expected a non-empty JSON list of "
            '{"n": .., "x": ..} objects'
        )
    out: List[Tuple[int, int]] = []
    for i, entry in enumerate(data):
        try:
            h_n, h_x = int(entry["n"]), int(entry["x"])
        except (TypeError, KeyError, ValueError):
            raise click.ClickException(
                f"history file {path}: entry {i} is not an object with "
                "integer 'n' and 'x'"
            )
        if not 0 <= h_x <= h_n:
            raise click.ClickException(
                f"history file {path}: entry {i} has x={h_x} outside 0..n={h_n}"
            )
        out.append((h_n, h_x))
    return out


def _sim_options(fn):
    fn = click.option("--eps-lo", default="0.05", show_default=True)(fn)
    fn = click.option("--eps-hi", default="0.05", show_default=True)(fn)
    fn = click.option("--n-trials", type=click.IntRange(min=1), default=1000, show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--max-patients", type=click.IntRange(min=1), default=30, show_default=True)(fn)
    fn = click.option("--cohort-size", default="3", show_default=True, help="Patients per cohort: an integer or 'random' (2-5, uniform).")(fn)
    fn = click.option("--consecutive-stop", type=click.IntRange(min=1), default=None, help="Stop a trial once more than this many consecutive patients land on one dose.")(fn)
    fn = click.option("--truncate-final-cohort", is_flag=True, help="Shrink the last cohort to fit the patient cap exactly.")(fn)
    fn = click.option("--crm-config", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON overrides for the power model (skeleton, prior).")(fn)
    fn = click.option("--blrm-config", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON overrides for the logistic model (doses, hyperparameters, overdose rule).")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report to a file instead of stdout.")(fn)
    return fn


@main.command("simulate")
@click.option("--design", type=click.Choice(DESIGNS), default="i3p3", show_default=True)
@click.option("--scenarios", "scenario_source", default="builtin:all", show_default=True, help=f"Scenario source: {_SELECTOR_HINT}.")
@_sim_options
def cmd_simulate(
    design: str,
    scenario_source: str,
    eps_lo: str,
    eps_hi: str,
    n_trials: int,
    seed: int,
    max_patients: int,
    cohort_size: str,
    consecutive_stop: Optional[int],
    truncate_final_cohort: bool,
    crm_config: Optional[str],
    blrm_config: Optional[str],
    fmt: str,
    out: Optional[str],
) -> None:
    """Run one design over scenarios and report operating characteristics."""
    _run_report(
        [design],
        _load_scenarios(scenario_source),
        _fraction(eps_lo, "--eps-lo"),
        _fraction(eps_hi, "--eps-hi"),
        n_trials,
        seed,
        max_patients,
        _parse_cohort_size(cohort_size),
        consecutive_stop,
        truncate_final_cohort,
        crm_config,
        blrm_config,
        fmt,
        out,
    )


@main.command("compare")
@click.option("--designs", required=True, help="Comma-separated design names, e.g. i3p3,3p3,boin.")
@click.option("--scenarios", "scenario_source", default="builtin:all", show_default=True, help=f"Scenario source: {_SELECTOR_HINT}.")
@_sim_options
def cmd_compare(
    designs: str,
    scenario_source: str,
    eps_lo: str,
    eps_hi: str,
    n_trials: int,
    seed: int,
    max_patients: int,
    cohort_size: str,
    consecutive_stop: Optional[int],
    truncate_final_cohort: bool,
    crm_config: Optional[str],
    blrm_config: Optional[str],
    fmt: str,
    out: Optional[str],
) -> None:
    """Run several designs on identical scenarios, one report block each.

    All designs share the per-trial random streams, so differences in the
    report come from the designs, not the draws."""
    _run_report(
        _parse_designs(designs),
        _load_scenarios(scenario_source),
        _fraction(eps_lo, "--eps-lo"),
        _fraction(eps_hi, "--eps-hi"),
        n_trials,
        seed,
        max_patients,
        _parse_cohort_size(cohort_size),
        consecutive_stop,
        truncate_final_cohort,
        crm_config,
        blrm_config,
        fmt,
        out,
    )


@main.command("scenarios")
@click.option("--select", default="builtin:all", show_default=True, help="Which built-in scenarios to export (builtin:all, builtin:pt0.3, builtin:<id>, ...).")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write to a file instead of stdout.")
def cmd_scenarios(select: str, out: Optional[str]) -> None:
    """Export built-in simulation scenarios as JSON (editable, re-loadable)."""
    if not select.startswith("builtin:"):
        raise click.UsageError(
            "expected a builtin: selector, e.g. builtin:all or builtin:pt0.3"
        )
    try:
        chosen = select_builtin(select)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(scenarios_to_json(chosen), out)


@main.command("sweep")
@click.option("--axis", type=click.Choice(["ei", "cohort"]), required=True, help="What to vary: interval width or cohort size.")
@click.option("--design", type=click.Choice(DESIGNS), default="i3p3", show_default=True)
@click.option("--pt", required=True, help="Target toxicity rate; picks the built-in scenario set unless --scenarios is given.")
@click.option("--eps-lo", default="0.05", show_default=True, help="Base interval half-widths (the ei axis overrides them per setting).")
@click.option("--eps-hi", default="0.05", show_default=True)
@click.option("--scenarios", "scenario_source", default=None, help=f"Optional scenario source: {_SELECTOR_HINT}.")
@click.option("--n-trials", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_sweep(
    axis: str,
    design: str,
    pt: str,
    eps_lo: str,
    eps_hi: str,
    scenario_source: Optional[str],
    n_trials: int,
    seed: int,
    fmt: str,
    out: Optional[str],
) -> None:
    """Sensitivity sweep: rerun the study across interval widths or cohort
    sizes and report mean +/- sd of safety, reliability, and toxicity."""
    ei = _interval(pt, eps_lo, eps_hi)
    scenarios = (
        _load_scenarios(scenario_source) if scenario_source is not None else None
    )
    try:
        cfg = SimConfig(design=design, ei=ei, n_trials=n_trials, seed=seed)
        rows = sensitivity_sweep(axis, cfg, scenarios)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if fmt == "json":
        payload = {
            "axis": axis,
            "design": design,
            "p_target": float(ei.p_target),
            "n_trials": n_trials,
            "seed": seed,
            "rows": [dataclasses.asdict(r) for r in rows],
        }
        _emit(json.dumps(payload, indent=2), out)
        return
    _emit(_render_sweep(axis, design, ei, n_trials, seed, rows), out)


def _render_sweep(
    axis: str,
    design: str,
    ei: EquivalenceInterval,
    n_trials: int,
    seed: int,
    rows: Sequence[SweepRow],
) -> str:
    width = max(len("setting"), max(len(r.setting) for r in rows)) + 2
    lines = [
        f"sensitivity sweep: axis {axis}, design {design}, "
        f"target {float(ei.p_target):g}, {n_trials} trials per cell, seed {seed}",
        f"{'setting':<{width}s}{'safety':<17s}{'reliability':<17s}observed tox",
    ]
    for r in rows:
        lines.append(
            f"{r.setting:<{width}s}"
            f"{f'{r.safety_mean:.3f} +/- {r.safety_sd:.3f}':<17s}"
            f"{f'{r.reliability_mean:.3f} +/- {r.reliability_sd:.3f}':<17s}"
            f"{r.pct_toxicity_mean:.3f} +/- {r.pct_toxicity_sd:.3f}"
        )
    return "\n".join(lines) + "\n"


@main.command("serve")
@click.option("--host", default=None, help="Bind address [default: $DOSEFIND_BIND host part, else 127.0.0.1].")
@click.option("--port", type=int, default=None, help="Bind port [default: $DOSEFIND_BIND port part, else 8000].")
@click.option("--data-dir", type=click.Path(file_okay=False), default=None, help="Event-log directory [default: $DOSEFIND_DATA_DIR].")
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None, help="Static web UI directory [default: $DOSEFIND_UI_DIR, else the bundled frontend build].")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Simulation worker threads [default: $DOSEFIND_WORKERS, else 2].")
def cmd_serve(
    host: Optional[str],
    port: Optional[int],
    data_dir: Optional[str],
    ui_dir: Optional[str],
    workers: Optional[int],
) -> None:
    """Run the trial-conduct HTTP service (and web UI, when built)."""
    import uvicorn

    from .service import create_app

    env_bind = os.environ.get("DOSEFIND_BIND", "")
    env_host, _, env_port = env_bind.rpartition(":")
    if host is None:
        host = env_host or (env_bind if env_bind and not env_port else "127.0.0.1")
    if port is None:
        if env_port:
            try:
                port = int(env_port)
            except ValueError:
                raise click.UsageError(
                    f"DOSEFIND_BIND has a non-numeric port: {env_bind!r}"
                )
        else:
            port = 8000
    app = create_app(data_dir=data_dir, ui_dir=ui_dir, workers=workers)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
