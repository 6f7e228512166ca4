/** Pure view-model builders.  Each one is a reshaping of service payloads
 * into render-ready data: no dose decision is ever computed here, and
 * every decision string is passed through byte-for-byte. */

import type {
  Banner,
  DoseCard,
  HistoryEntry,
  SessionPayload,
  SimulationRecord,
  SimViewModel,
  TablePayload,
  TableViewModel,
  TrialViewModel,
} from "./types.js";

export function doseCards(session: SessionPayload): DoseCard[] {
  return session.doses.map((d) => ({
    dose: d.dose,
    nTreated: d.n_treated,
    nDlt: d.n_dlt,
    excluded: d.excluded,
    isCurrent: d.dose === session.current_dose && session.status === "Active",
  }));
}

export interface TrialState {
  session: SessionPayload | null;
  history: HistoryEntry[];
  /** Verbatim message of the latest decision or finalize response. */
  lastMessage: string | null;
  /** Kind of the latest message, controlling banner styling. */
  lastKind: Banner["kind"];
  /** Inline error (validation or transport); never a decision string. */
  error: string | null;
  finalized: boolean;
  /** (n, x) at the dose the latest decision evaluated. */
  highlight: { n: number; x: number } | null;
}

export function emptyTrialState(): TrialState {
  return {
    session: null,
    history: [],
    lastMessage: null,
    lastKind: "idle",
    error: null,
    finalized: false,
    highlight: null,
  };
}

function banner(state: TrialState): Banner {
  if (state.error !== null) return { kind: "error", text: state.error };
  if (state.lastMessage !== null)
    return { kind: state.lastKind, text: state.lastMessage };
  if (state.session === null)
    return { kind: "idle", text: "Set up a trial to begin." };
  return {
    kind: "info",
    text: `Trial ready — enter the first cohort at dose ${state.session.current_dose}.`,
  };
}

export function trialViewModel(state: TrialState): TrialViewModel {
  const s = state.session;
  return {
    sessionId: s ? s.id : null,
    status: s ? s.status : null,
    banner: banner(state),
    doseCards: s ? doseCards(s) : [],
    history: state.history,
    highlight: state.highlight,
    entryDisabled: s === null || s.status !== "Active" || state.finalized,
    selectedMtd: s ? s.selected_mtd : null,
    totalPatients: s ? s.total_patients : 0,
    totalDlts: s ? s.total_dlts : 0,
  };
}

function cellKey(n: number, x: number): string {
  return `${n},${x}`;
}

/** Reshape the service's flat cell list into a (n, x)-indexed grid.  Cell
 * strings are stored exactly as received. */
export function tableViewModel(
  payload: TablePayload,
  highlight: { n: number; x: number } | null = null,
): TableViewModel {
  const columns = [...new Set(payload.cells.map((c) => c.n))].sort(
    (a, b) => a - b,
  );
  const rows = [...new Set(payload.cells.map((c) => c.x))].sort(
    (a, b) => a - b,
  );
  const cells = new Map<string, string>();
  for (const c of payload.cells) cells.set(cellKey(c.n, c.x), c.decision);
  return { columns, rows, cells, highlight };
}

export function cellAt(vm: TableViewModel, n: number, x: number): string | null {
  return vm.cells.get(cellKey(n, x)) ?? null;
}

function pct(v: number): string {
  return `${(100 * v).toFixed(1)}%`;
}

export function simViewModel(record: SimulationRecord): SimViewModel {
  if (record.status !== "Done" || !record.result) {
    return {
      status: record.status,
      error: record.status === "Failed" ? (record.error ?? "unknown error") : null,
      selectionBars: [],
      patientBars: [],
      cards: [],
    };
  }
  const r = record.result;
  const selectionBars = r.selection_prob.map((v, i) => ({
    label: `dose ${i + 1}`,
    value: v,
  }));
  selectionBars.push({ label: "none", value: r.prob_no_selection });
  return {
    status: record.status,
    error: null,
    selectionBars,
    patientBars: r.mean_patients.map((v, i) => ({
      label: `dose ${i + 1}`,
      value: v,
    })),
    cards: [
      { label: "correct selection", value: pct(r.pcs) },
      { label: "safety", value: pct(r.safety) },
      { label: "observed toxicity", value: pct(r.pct_toxicity) },
      { label: "selected above MTD", value: pct(r.prob_over_mtd) },
      { label: "trials", value: String(r.n_trials) },
    ],
  };
}

// ---------------------------------------------------------------------------
// Form validation — the same bounds the service enforces, checked before
// any request is sent so an invalid entry never mutates the session.
// ---------------------------------------------------------------------------

export function validateCohortEntry(
  cohortSize: number,
  dltCount: number,
): string | null {
  if (!Number.isInteger(cohortSize) || cohortSize < 1)
    return "Cohort size must be a whole number of at least 1.";
  if (!Number.isInteger(dltCount) || dltCount < 0)
    return "DLT count must be a whole number of at least 0.";
  if (dltCount > cohortSize)
    return `DLT count (${dltCount}) cannot exceed the cohort size (${cohortSize}).`;
  return null;
}

export function validateTrialSetup(
  pTarget: number,
  epsLo: number,
  epsHi: number,
  nDoses: number,
): string | null {
  if (!(pTarget > 0 && pTarget < 1))
    return "Target toxicity rate must be strictly between 0 and 1.";
  if (!(epsLo >= 0) || !(epsHi >= 0))
    return "Interval half-widths must be at least 0.";
  if (pTarget - epsLo <= 0)
    return "The interval's lower edge must stay above 0.";
  if (pTarget + epsHi >= 1)
    return "The interval's upper edge must stay below 1.";
  if (!Number.isInteger(nDoses) || nDoses < 1)
    return "Number of doses must be a whole number of at least 1.";
  return null;
}
