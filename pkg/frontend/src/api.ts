/** Thin typed client over the service's HTTP+JSON API.  The fetch
 * implementation is injected so tests can intercept every request and
 * script every response. */

import type {
  CohortRequest,
  CohortResponse,
  CreateTrialRequest,
  FinalizeResponse,
  ProblemDetail,
  SessionPayload,
  SimulationRecord,
  SimulationRequest,
  TablePayload,
  TableQuery,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** Error carrying the service's problem document, when one was returned. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly problem: ProblemDetail | null,
  ) {
    super(problem ? `${problem.title}: ${problem.detail}` : `HTTP ${status}`);
    this.name = "ApiError";
  }

  /** One-line text suitable for an inline form error. */
  get inlineText(): string {
    if (!this.problem) return `Request failed (HTTP ${this.status}).`;
    const fields = (this.problem.errors ?? [])
      .map((e) => `${e.field}: ${e.message}`)
      .join("; ");
    return fields
      ? `${this.problem.title} — ${fields}`
      : `${this.problem.title} — ${this.problem.detail}`;
  }
}

function tableParams(q: TableQuery): string {
  const p = new URLSearchParams({
    pt: String(q.pt),
    eps_lo: String(q.eps_lo),
    eps_hi: String(q.eps_hi),
    max_n: String(q.max_n),
  });
  return p.toString();
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base: string = "",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      let problem: ProblemDetail | null = null;
      try {
        problem = (await res.json()) as ProblemDetail;
      } catch {
        problem = null;
      }
      throw new ApiError(res.status, problem);
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createTrial(body: CreateTrialRequest): Promise<SessionPayload> {
    return this.post<SessionPayload>("/trials", body);
  }

  getTrial(id: string): Promise<SessionPayload> {
    return this.request<SessionPayload>(`/trials/${id}`);
  }

  postCohort(id: string, body: CohortRequest): Promise<CohortResponse> {
    return this.post<CohortResponse>(`/trials/${id}/cohorts`, body);
  }

  finalize(id: string, force: boolean): Promise<FinalizeResponse> {
    return this.post<FinalizeResponse>(`/trials/${id}/finalize`, { force });
  }

  getTable(design: string, q: TableQuery): Promise<TablePayload> {
    return this.request<TablePayload>(
      `/designs/${design}/table?${tableParams(q)}`,
    );
  }

  /** URL of the CSV rendering of the same table, for the download link —
   * the browser streams the service's CSV unmodified. */
  tableCsvUrl(design: string, q: TableQuery): string {
    return `${this.base}/designs/${design}/table?${tableParams(q)}&format=csv`;
  }

  createSimulation(
    body: SimulationRequest,
  ): Promise<{ id: string; status: string }> {
    return this.post<{ id: string; status: string }>("/simulations", body);
  }

  getSimulation(id: string): Promise<SimulationRecord> {
    return this.request<SimulationRecord>(`/simulations/${id}`);
  }
}
