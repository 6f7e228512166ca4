/** Payload shapes of the dose-finding service's HTTP+JSON API, and the
 * view models this UI derives from them.  Every decision string shown to
 * the user is carried through verbatim from a service response; the UI
 * never computes a dose decision of its own. */

// ---------------------------------------------------------------------------
// Service payloads
// ---------------------------------------------------------------------------

export interface DoseState {
  dose: number;
  n_treated: number;
  n_dlt: number;
  excluded: boolean;
}

export type SessionStatus = "Active" | "Terminated" | "Completed";

export interface SessionPayload {
  id: string;
  design: string;
  p_target: number;
  eps_lo: number;
  eps_hi: number;
  n_doses: number;
  status: SessionStatus;
  current_dose: number;
  selected_mtd: number | null;
  total_patients: number;
  total_dlts: number;
  doses: DoseState[];
  events: unknown[];
}

export interface DecisionPayload {
  /** Raw table letter (E / S / D / DU). */
  letter: string;
  /** Final verdict after safety rules (E / S / D / DU / T). */
  verdict: string;
  next_dose: number | null;
  /** Human-readable instruction, e.g. "Escalate to dose 2." */
  message: string;
}

export interface CohortResponse {
  decision: DecisionPayload;
  session: SessionPayload;
}

export interface FinalizeResponse {
  selected_mtd: number | null;
  message: string;
  session: SessionPayload;
}

export interface TableCell {
  n: number;
  x: number;
  decision: string;
}

export interface TablePayload {
  cells: TableCell[];
}

export type SimulationStatus = "Queued" | "Running" | "Done" | "Failed";

export interface SimulationResult {
  selection_prob: number[];
  mean_patients: number[];
  mean_toxicities: number[];
  pcs: number;
  safety: number;
  pct_toxicity: number;
  prob_over_mtd: number;
  prob_no_selection: number;
  n_trials: number;
}

export interface SimulationRecord {
  id: string;
  status: SimulationStatus;
  result?: SimulationResult;
  error?: string;
}

/** RFC 7807-style problem document the service returns on every error. */
export interface ProblemDetail {
  type: string;
  title: string;
  status: number;
  detail: string;
  code: string;
  errors?: { field: string; message: string }[];
}

// ---------------------------------------------------------------------------
// Request bodies
// ---------------------------------------------------------------------------

export interface CreateTrialRequest {
  design: string;
  p_target: number;
  eps_lo: number;
  eps_hi: number;
  n_doses?: number;
  safety_threshold?: number;
}

export interface CohortRequest {
  dlt_count: number;
  cohort_size: number;
}

export interface TableQuery {
  pt: number;
  eps_lo: number;
  eps_hi: number;
  max_n: number;
}

export interface SimulationRequest {
  design: string;
  p_target: number;
  eps_lo: number;
  eps_hi: number;
  builtin?: string;
  scenario?: { id?: string; p_target: number; true_tox: number[] };
  n_trials?: number;
  seed?: number;
  max_patients?: number;
  cohort_size?: number | string;
}

// ---------------------------------------------------------------------------
// View models (pure data; built only from the payloads above)
// ---------------------------------------------------------------------------

export interface DoseCard {
  dose: number;
  nTreated: number;
  nDlt: number;
  excluded: boolean;
  isCurrent: boolean;
}

export interface HistoryEntry {
  /** 1-based cohort number, in entry order. */
  cohort: number;
  /** Dose the cohort was treated at (from the session before the entry). */
  dose: number;
  cohortSize: number;
  dltCount: number;
  /** Decision message, verbatim from the service. */
  message: string;
  verdict: string;
}

export type BannerKind =
  | "idle"
  | "info"
  | "decision"
  | "terminated"
  | "finalized"
  | "error";

export interface Banner {
  kind: BannerKind;
  /** For decision/terminated/finalized banners this is a verbatim service
   * string; info/error banners carry local status text only (never a dose
   * decision). */
  text: string;
}

export interface TrialViewModel {
  sessionId: string | null;
  status: SessionStatus | null;
  banner: Banner;
  doseCards: DoseCard[];
  history: HistoryEntry[];
  /** Cumulative (n, x) at the dose the latest decision evaluated, for
   * highlighting the matching decision-table cell. */
  highlight: { n: number; x: number } | null;
  /** True once the session no longer accepts cohorts. */
  entryDisabled: boolean;
  selectedMtd: number | null;
  totalPatients: number;
  totalDlts: number;
}

export interface TableViewModel {
  /** Column headers: number of patients treated, ascending. */
  columns: number[];
  /** Row headers: number of DLTs, ascending. */
  rows: number[];
  /** cellFor(n, x) — the service's decision string, byte-for-byte, or null
   * where the service sent no cell (x > n). */
  cells: Map<string, string>;
  highlight: { n: number; x: number } | null;
}

export interface BarDatum {
  label: string;
  value: number;
}

export interface SimViewModel {
  status: SimulationStatus;
  error: string | null;
  selectionBars: BarDatum[];
  patientBars: BarDatum[];
  cards: { label: string; value: string }[];
}
