/** Test doubles: a scripted fetch that records every request and replays
 * canned responses, plus payload builders mirroring the shapes the live
 * service returns (captured from real responses). */

import type { FetchLike } from "../src/api";
import type {
  CohortResponse,
  DoseState,
  FinalizeResponse,
  SessionPayload,
} from "../src/types";

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

export class FetchScript {
  readonly requests: RecordedRequest[] = [];
  private readonly queue: { status: number; body: unknown }[] = [];

  reply(body: unknown, status = 200): this {
    this.queue.push({ status, body });
    return this;
  }

  /** All decision/message strings that have crossed the wire in responses,
   * for parity assertions ("every displayed string came from a response"). */
  sentStrings(): string[] {
    return this.queue.map((q) => JSON.stringify(q.body));
  }

  readonly fetch: FetchLike = async (url, init) => {
    this.requests.push({
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : null,
    });
    const next = this.queue.shift();
    if (!next) throw new Error(`unscripted request: ${url}`);
    return new Response(JSON.stringify(next.body), {
      status: next.status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

/** A fetch that rejects, simulating an unreachable service. */
export const downFetch: FetchLike = async () => {
  throw new TypeError("fetch failed");
};

export function doses(
  states: Array<[number, number, boolean?]>,
): DoseState[] {
  return states.map(([n, x, excluded], i) => ({
    dose: i + 1,
    n_treated: n,
    n_dlt: x,
    excluded: excluded ?? false,
  }));
}

export function session(over: Partial<SessionPayload> = {}): SessionPayload {
  return {
    id: "7edc59b92b16400d9fab838e7185c10b",
    design: "i3p3",
    p_target: 0.3,
    eps_lo: 0.05,
    eps_hi: 0.05,
    n_doses: 6,
    status: "Active",
    current_dose: 1,
    selected_mtd: null,
    total_patients: 0,
    total_dlts: 0,
    doses: doses([[0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]]),
    events: [],
    ...over,
  };
}

export function cohortResponse(
  message: string,
  verdict: string,
  nextDose: number | null,
  sess: SessionPayload,
  letter = verdict,
): CohortResponse {
  return {
    decision: { letter, verdict, next_dose: nextDose, message },
    session: sess,
  };
}

export function finalizeResponse(
  selected: number | null,
  message: string,
  sess: SessionPayload,
): FinalizeResponse {
  return { selected_mtd: selected, message, session: sess };
}

// ---------------------------------------------------------------------------
// Minimal element stubs for the render functions.
// ---------------------------------------------------------------------------

export function conductStubs() {
  return {
    banner: { textContent: "" as string | null, className: "" },
    doseCards: { innerHTML: "" },
    history: { innerHTML: "" },
    summary: { textContent: "" as string | null },
    cohortSubmit: { disabled: false },
    cohortSize: { disabled: false },
    dltCount: { disabled: false },
    finalize: { disabled: true },
  };
}
