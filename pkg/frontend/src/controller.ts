/** Controllers: small state machines between the forms and the API client.
 * They hold per-tab state, enforce the service's validation bounds before
 * sending anything, and copy decision strings out of responses without
 * modification.  A failed request leaves the trial state exactly as it
 * was, with an inline error and the form still usable for a retry. */

import { ApiClient, ApiError } from "./api.js";
import type {
  CreateTrialRequest,
  SimulationRecord,
  SimulationRequest,
  TablePayload,
  TableQuery,
  TrialViewModel,
} from "./types.js";
import {
  emptyTrialState,
  trialViewModel,
  TrialState,
  validateCohortEntry,
  validateTrialSetup,
} from "./viewmodels.js";

function errorText(err: unknown): string {
  if (err instanceof ApiError) return err.inlineText;
  return "Network error — the service could not be reached. Check it and retry.";
}

export class ConductController {
  private state: TrialState = emptyTrialState();

  constructor(private readonly api: ApiClient) {}

  get viewModel(): TrialViewModel {
    return trialViewModel(this.state);
  }

  async createTrial(form: CreateTrialRequest): Promise<void> {
    const invalid = validateTrialSetup(
      form.p_target,
      form.eps_lo,
      form.eps_hi,
      form.n_doses ?? 6,
    );
    if (invalid !== null) {
      this.state.error = invalid;
      return;
    }
    try {
      const session = await this.api.createTrial(form);
      this.state = emptyTrialState();
      this.state.session = session;
    } catch (err) {
      this.state.error = errorText(err);
    }
  }

  /** Submit one cohort's outcome.  An entry that fails local validation is
   * rejected inline and no request is made. */
  async submitCohort(cohortSize: number, dltCount: number): Promise<void> {
    const s = this.state.session;
    if (s === null) {
      this.state.error = "Create a trial first.";
      return;
    }
    if (s.status !== "Active" || this.state.finalized) {
      this.state.error = "This trial no longer accepts cohorts.";
      return;
    }
    const invalid = validateCohortEntry(cohortSize, dltCount);
    if (invalid !== null) {
      this.state.error = invalid;
      return;
    }
    const doseTreated = s.current_dose;
    try {
      const res = await this.api.postCohort(s.id, {
        cohort_size: cohortSize,
        dlt_count: dltCount,
      });
      this.state.error = null;
      this.state.session = res.session;
      this.state.lastMessage = res.decision.message;
      this.state.lastKind =
        res.decision.verdict === "T" ? "terminated" : "decision";
      const after = res.session.doses.find((d) => d.dose === doseTreated);
      this.state.highlight = after
        ? { n: after.n_treated, x: after.n_dlt }
        : null;
      this.state.history.push({
        cohort: this.state.history.length + 1,
        dose: doseTreated,
        cohortSize,
        dltCount,
        message: res.decision.message,
        verdict: res.decision.verdict,
      });
    } catch (err) {
      this.state.error = errorText(err);
    }
  }

  async finalize(force: boolean): Promise<void> {
    const s = this.state.session;
    if (s === null) {
      this.state.error = "Create a trial first.";
      return;
    }
    try {
      const res = await this.api.finalize(s.id, force);
      this.state.error = null;
      this.state.session = res.session;
      this.state.lastMessage = res.message;
      this.state.lastKind = "finalized";
      this.state.finalized = true;
    } catch (err) {
      this.state.error = errorText(err);
    }
  }
}

export interface TableState {
  query: TableQuery;
  payload: TablePayload | null;
  error: string | null;
}

export class TableController {
  state: TableState = {
    query: { pt: 0.3, eps_lo: 0.05, eps_hi: 0.05, max_n: 15 },
    payload: null,
    error: null,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly design: string = "i3p3",
  ) {}

  /** Fetch the table for a query.  Any parameter change re-fetches; the
   * grid is never recomputed locally. */
  async load(query: TableQuery): Promise<void> {
    const invalid = validateTrialSetup(
      query.pt,
      query.eps_lo,
      query.eps_hi,
      1,
    );
    if (invalid !== null) {
      this.state.error = invalid;
      return;
    }
    try {
      const payload = await this.api.getTable(this.design, query);
      this.state = { query, payload, error: null };
    } catch (err) {
      this.state.error = errorText(err);
    }
  }

  csvUrl(): string {
    return this.api.tableCsvUrl(this.design, this.state.query);
  }
}

export interface SimState {
  jobId: string | null;
  record: SimulationRecord | null;
  error: string | null;
}

export class SimController {
  state: SimState = { jobId: null, record: null, error: null };

  constructor(private readonly api: ApiClient) {}

  async submit(body: SimulationRequest): Promise<void> {
    const invalid = validateTrialSetup(
      body.p_target,
      body.eps_lo,
      body.eps_hi,
      1,
    );
    if (invalid !== null) {
      this.state.error = invalid;
      return;
    }
    try {
      const job = await this.api.createSimulation(body);
      this.state = {
        jobId: job.id,
        record: { id: job.id, status: job.status as SimulationRecord["status"] },
        error: null,
      };
    } catch (err) {
      this.state.error = errorText(err);
    }
  }

  /** One polling step; returns true while the job is still in flight. */
  async poll(): Promise<boolean> {
    if (this.state.jobId === null) return false;
    try {
      const record = await this.api.getSimulation(this.state.jobId);
      this.state.record = record;
      return record.status === "Queued" || record.status === "Running";
    } catch (err) {
      this.state.error = errorText(err);
      return false;
    }
  }
}
