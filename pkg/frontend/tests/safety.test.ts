/** Safety-stop flow: 3/3 DLTs at dose 1 must render the service's
 * termination banner and lock the cohort-entry controls. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { ConductController } from "../src/controller";
import { renderConduct } from "../src/render";
import { cohortResponse, conductStubs, doses, FetchScript, session } from "./fakes";

const TERMINATE_MSG =
  "Terminate the trial: the lowest dose is unacceptably toxic.";

function terminationScript(): FetchScript {
  const script = new FetchScript();
  script.reply(session());
  script.reply(
    cohortResponse(
      TERMINATE_MSG,
      "T",
      null,
      session({
        status: "Terminated",
        total_patients: 3,
        total_dlts: 3,
        doses: doses([[3, 3, true], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]]),
      }),
      "DU",
    ),
  );
  return script;
}

describe("termination on 3/3 at dose 1", () => {
  async function terminate() {
    const script = terminationScript();
    const controller = new ConductController(new ApiClient(script.fetch));
    const els = conductStubs();
    await controller.createTrial({
      design: "i3p3",
      p_target: 0.3,
      eps_lo: 0.05,
      eps_hi: 0.05,
      n_doses: 6,
    });
    await controller.submitCohort(3, 3);
    renderConduct(controller.viewModel, els);
    return { script, controller, els };
  }

  it("renders the service's termination message as a termination banner", async () => {
    const { els } = await terminate();
    expect(els.banner.textContent).toBe(TERMINATE_MSG);
    expect(els.banner.className).toContain("banner-terminated");
  });

  it("disables all further cohort entry", async () => {
    const { els } = await terminate();
    expect(els.cohortSubmit.disabled).toBe(true);
    expect(els.cohortSize.disabled).toBe(true);
    expect(els.dltCount.disabled).toBe(true);
  });

  it("marks the toxic dose excluded on its card", async () => {
    const { controller } = await terminate();
    const card = controller.viewModel.doseCards[0];
    expect(card.excluded).toBe(true);
    expect(card.nDlt).toBe(3);
    expect(card.nTreated).toBe(3);
  });

  it("refuses further entries without sending any request", async () => {
    const { script, controller, els } = await terminate();
    const sent = script.requests.length;
    await controller.submitCohort(3, 0);
    renderConduct(controller.viewModel, els);
    expect(script.requests.length).toBe(sent); // nothing left the browser
    expect(controller.viewModel.banner.kind).toBe("error");
    expect(els.cohortSubmit.disabled).toBe(true);
  });
});

describe("local validation before any request", () => {
  it("rejects 4 DLTs in a cohort of 3 inline, sending nothing", async () => {
    const script = new FetchScript();
    script.reply(session());
    const controller = new ConductController(new ApiClient(script.fetch));
    await controller.createTrial({
      design: "i3p3",
      p_target: 0.3,
      eps_lo: 0.05,
      eps_hi: 0.05,
    });
    const sent = script.requests.length;
    await controller.submitCohort(3, 4);
    expect(script.requests.length).toBe(sent);
    const vm = controller.viewModel;
    expect(vm.banner.kind).toBe("error");
    expect(vm.banner.text).toContain("cannot exceed the cohort size");
    expect(vm.totalPatients).toBe(0);
  });
});
