/** Simulation explorer: job submission, polling, chart view models, and
 * the pass-through of results (including failures) from the service. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { SimController } from "../src/controller";
import { renderSim } from "../src/render";
import { simViewModel } from "../src/viewmodels";
import { FetchScript } from "./fakes";
import type { SimulationRecord } from "../src/types";

/** Shape captured from a live run of the service (200 trials, builtin
 * scenario, seed 7). */
const DONE_RECORD: SimulationRecord = {
  id: "6f64f401d4204ef9a60366c6ffef4a03",
  status: "Done",
  result: {
    selection_prob: [0.335, 0.63, 0.035, 0.0, 0.0, 0.0],
    mean_patients: [7.875, 17.265, 4.515, 0.33, 0.015, 0.0],
    mean_toxicities: [0.075, 5.195, 2.525, 0.245, 0.01, 0.0],
    pcs: 0.63,
    safety: 0.838,
    pct_toxicity: 0.2683333333333333,
    prob_over_mtd: 0.035,
    prob_no_selection: 0.0,
    n_trials: 200,
  },
};

const REQUEST = {
  design: "i3p3",
  p_target: 0.3,
  eps_lo: 0.05,
  eps_hi: 0.05,
  builtin: "31",
  n_trials: 200,
  seed: 7,
};

describe("simulation job lifecycle", () => {
  it("submits, polls while in flight, and stops when done", async () => {
    const script = new FetchScript();
    script
      .reply({ id: DONE_RECORD.id, status: "Queued" })
      .reply({ id: DONE_RECORD.id, status: "Running" })
      .reply(DONE_RECORD);
    const controller = new SimController(new ApiClient(script.fetch));

    await controller.submit(REQUEST);
    expect(script.requests[0].body).toEqual(REQUEST);

    expect(await controller.poll()).toBe(true); // Running → keep polling
    expect(await controller.poll()).toBe(false); // Done → stop
    expect(controller.state.record?.status).toBe("Done");
    expect(script.requests.slice(1).map((r) => r.url)).toEqual([
      `/simulations/${DONE_RECORD.id}`,
      `/simulations/${DONE_RECORD.id}`,
    ]);
  });

  it("shows a failed job's error message verbatim", () => {
    const vm = simViewModel({
      id: "x",
      status: "Failed",
      error: "unknown builtin scenario selector: 'builtin:99'",
    });
    expect(vm.error).toBe("unknown builtin scenario selector: 'builtin:99'");
    const host = { innerHTML: "" };
    renderSim(vm, host);
    expect(host.innerHTML).toContain("Simulation failed");
    expect(host.innerHTML).toContain("unknown builtin scenario selector");
  });
});

describe("result charts", () => {
  it("partitions selection probability across doses plus no-selection", () => {
    const vm = simViewModel(DONE_RECORD);
    expect(vm.selectionBars).toHaveLength(7); // 6 doses + "none"
    const total = vm.selectionBars.reduce((s, b) => s + b.value, 0);
    expect(total).toBeCloseTo(1.0, 9);
  });

  it("summarizes the headline metrics as cards", () => {
    const vm = simViewModel(DONE_RECORD);
    const byLabel = Object.fromEntries(vm.cards.map((c) => [c.label, c.value]));
    expect(byLabel["correct selection"]).toBe("63.0%");
    expect(byLabel["safety"]).toBe("83.8%");
    expect(byLabel["observed toxicity"]).toBe("26.8%");
    expect(byLabel["trials"]).toBe("200");
  });

  it("renders identical charts for identical results (seed determinism passes through)", () => {
    const a = { innerHTML: "" };
    const b = { innerHTML: "" };
    renderSim(simViewModel(DONE_RECORD), a);
    renderSim(simViewModel({ ...DONE_RECORD }), b);
    expect(a.innerHTML).toBe(b.innerHTML);
    expect(a.innerHTML).toContain("Selection probability");
    expect(a.innerHTML).toContain("Mean patients per dose");
  });

  it("shows pending states without charts", () => {
    const host = { innerHTML: "" };
    renderSim(simViewModel({ id: "x", status: "Running" }), host);
    expect(host.innerHTML).toContain("running");
    expect(host.innerHTML).not.toContain("bar-chart");
  });
});
