/** Rendering: view models in, DOM mutations out.  Elements are passed as
 * minimal structural interfaces so the same functions run against real DOM
 * nodes in the browser and plain stub objects in tests.  Nothing in this
 * module decides anything; it only displays what the view models carry. */

import type {
  SimViewModel,
  TableViewModel,
  TrialViewModel,
} from "./types.js";
import { cellAt } from "./viewmodels.js";

export interface TextHost {
  textContent: string | null;
}

export interface ClassedTextHost extends TextHost {
  className: string;
}

export interface HtmlHost {
  innerHTML: string;
}

export interface Disableable {
  disabled: boolean;
}

export interface ConductElements {
  banner: ClassedTextHost;
  doseCards: HtmlHost;
  history: HtmlHost;
  summary: TextHost;
  cohortSubmit: Disableable;
  cohortSize: Disableable;
  dltCount: Disableable;
  finalize: Disableable;
}

const esc = (s: string): string =>
  s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");

/** CSS class for a decision string: one of four known states, defaulting
 * to a neutral style for anything unrecognized. */
export function decisionClass(decision: string): string {
  return ["E", "S", "D", "DU"].includes(decision)
    ? `cell-${decision}`
    : "cell-other";
}

export function renderConduct(vm: TrialViewModel, els: ConductElements): void {
  els.banner.textContent = vm.banner.text;
  els.banner.className = `banner banner-${vm.banner.kind}`;

  els.doseCards.innerHTML = vm.doseCards
    .map((c) => {
      const classes = ["dose-card"];
      if (c.isCurrent) classes.push("dose-current");
      if (c.excluded) classes.push("dose-excluded");
      return (
        `<div class="${classes.join(" ")}">` +
        `<div class="dose-label">dose ${c.dose}</div>` +
        `<div class="dose-counts">${c.nDlt}/${c.nTreated} DLT</div>` +
        (c.excluded ? `<div class="dose-flag">excluded</div>` : "") +
        `</div>`
      );
    })
    .join("");

  els.history.innerHTML = vm.history
    .map(
      (h) =>
        `<li><span class="history-entry">cohort ${h.cohort} — dose ${h.dose}, ` +
        `${h.dltCount}/${h.cohortSize} DLT:</span> ` +
        `<span class="history-message ${decisionClass(h.verdict)}">${esc(h.message)}</span></li>`,
    )
    .join("");

  els.summary.textContent =
    vm.sessionId === null
      ? ""
      : `${vm.totalPatients} patients, ${vm.totalDlts} DLTs` +
        (vm.selectedMtd !== null ? ` — selected MTD: dose ${vm.selectedMtd}` : "");

  els.cohortSubmit.disabled = vm.entryDisabled;
  els.cohortSize.disabled = vm.entryDisabled;
  els.dltCount.disabled = vm.entryDisabled;
  els.finalize.disabled = vm.sessionId === null;
}

/** Render the (n, x) decision grid.  Every cell's text is the service's
 * string, escaped but otherwise untouched. */
export function renderTable(vm: TableViewModel, host: HtmlHost): void {
  const head =
    `<tr><th>DLTs \\ patients</th>` +
    vm.columns.map((n) => `<th>${n}</th>`).join("") +
    `</tr>`;
  const body = vm.rows
    .map((x) => {
      const cells = vm.columns
        .map((n) => {
          const d = cellAt(vm, n, x);
          if (d === null) return `<td class="cell-empty"></td>`;
          const hl =
            vm.highlight && vm.highlight.n === n && vm.highlight.x === x
              ? " cell-highlight"
              : "";
          return `<td class="${decisionClass(d)}${hl}">${esc(d)}</td>`;
        })
        .join("");
      return `<tr><th>${x}</th>${cells}</tr>`;
    })
    .join("");
  host.innerHTML = `<table class="decision-table">${head}${body}</table>`;
}

function bars(title: string, data: { label: string; value: number }[], unit: "prob" | "count"): string {
  const max = unit === "prob" ? 1 : Math.max(1, ...data.map((d) => d.value));
  const rows = data
    .map((d) => {
      const width = ((100 * d.value) / max).toFixed(1);
      const text = unit === "prob" ? d.value.toFixed(3) : d.value.toFixed(1);
      return (
        `<div class="bar-row"><span class="bar-label">${esc(d.label)}</span>` +
        `<span class="bar-track"><span class="bar-fill" style="width:${width}%"></span></span>` +
        `<span class="bar-value">${text}</span></div>`
      );
    })
    .join("");
  return `<div class="bar-chart"><h3>${esc(title)}</h3>${rows}</div>`;
}

export function renderSim(vm: SimViewModel, host: HtmlHost): void {
  if (vm.status === "Failed") {
    host.innerHTML = `<div class="sim-error">Simulation failed: ${esc(vm.error ?? "")}</div>`;
    return;
  }
  if (vm.status !== "Done") {
    host.innerHTML = `<div class="sim-pending">Simulation ${esc(vm.status.toLowerCase())}…</div>`;
    return;
  }
  const cards = vm.cards
    .map(
      (c) =>
        `<div class="sim-card"><div class="sim-card-value">${esc(c.value)}</div>` +
        `<div class="sim-card-label">${esc(c.label)}</div></div>`,
    )
    .join("");
  host.innerHTML =
    `<div class="sim-cards">${cards}</div>` +
    bars("Selection probability", vm.selectionBars, "prob") +
    bars("Mean patients per dose", vm.patientBars, "count");
}
