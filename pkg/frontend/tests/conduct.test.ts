/** Decision parity: conducting the six-patient worked example through the
 * UI layer displays exactly the strings the service responded with.  The
 * scripted fetch records every request, so the tests can prove both that
 * the right requests were sent and that no displayed decision string
 * originated anywhere but a response. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { ConductController } from "../src/controller";
import { renderConduct } from "../src/render";
import {
  cohortResponse,
  conductStubs,
  doses,
  FetchScript,
  finalizeResponse,
  session,
} from "./fakes";

/** Script the service's side of the worked example: 0/3 at dose 1 then
 * 1/3 at dose 2, with the given decision messages. */
function workedExampleScript(msgs: {
  first: string;
  second: string;
  final: string;
}): FetchScript {
  const script = new FetchScript();
  script.reply(session());
  script.reply(
    cohortResponse(
      msgs.first,
      "E",
      2,
      session({
        current_dose: 2,
        total_patients: 3,
        doses: doses([[3, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]]),
      }),
    ),
  );
  script.reply(
    cohortResponse(
      msgs.second,
      "S",
      2,
      session({
        current_dose: 2,
        total_patients: 6,
        total_dlts: 1,
        doses: doses([[3, 0], [3, 1], [0, 0], [0, 0], [0, 0], [0, 0]]),
      }),
    ),
  );
  script.reply(
    finalizeResponse(
      2,
      msgs.final,
      session({
        status: "Completed",
        selected_mtd: 2,
        total_patients: 6,
        total_dlts: 1,
        doses: doses([[3, 0], [3, 1], [0, 0], [0, 0], [0, 0], [0, 0]]),
      }),
    ),
  );
  return script;
}

async function conductWorkedExample(script: FetchScript) {
  const controller = new ConductController(new ApiClient(script.fetch));
  const els = conductStubs();
  const banners: string[] = [];

  await controller.createTrial({
    design: "i3p3",
    p_target: 0.3,
    eps_lo: 0.05,
    eps_hi: 0.05,
    n_doses: 6,
  });
  await controller.submitCohort(3, 0);
  renderConduct(controller.viewModel, els);
  banners.push(els.banner.textContent ?? "");

  await controller.submitCohort(3, 1);
  renderConduct(controller.viewModel, els);
  banners.push(els.banner.textContent ?? "");

  await controller.finalize(true);
  renderConduct(controller.viewModel, els);
  banners.push(els.banner.textContent ?? "");

  return { controller, els, banners };
}

describe("worked-example conduct parity", () => {
  const liveMessages = {
    first: "Escalate to dose 2.",
    second: "Stay at dose 2.",
    final: "Dose 2 is selected as the MTD.",
  };

  it("shows each service decision verbatim as the banner", async () => {
    const script = workedExampleScript(liveMessages);
    const { banners } = await conductWorkedExample(script);
    expect(banners).toEqual([
      "Escalate to dose 2.",
      "Stay at dose 2.",
      "Dose 2 is selected as the MTD.",
    ]);
  });

  it("sends exactly the entered cohort data, unmodified", async () => {
    const script = workedExampleScript(liveMessages);
    await conductWorkedExample(script);
    expect(script.requests.map((r) => [r.method, r.url])).toEqual([
      ["POST", "/trials"],
      ["POST", "/trials/7edc59b92b16400d9fab838e7185c10b/cohorts"],
      ["POST", "/trials/7edc59b92b16400d9fab838e7185c10b/cohorts"],
      ["POST", "/trials/7edc59b92b16400d9fab838e7185c10b/finalize"],
    ]);
    expect(script.requests[1].body).toEqual({ cohort_size: 3, dlt_count: 0 });
    expect(script.requests[2].body).toEqual({ cohort_size: 3, dlt_count: 1 });
    expect(script.requests[3].body).toEqual({ force: true });
  });

  it("highlights the table cell for the latest decision's (n, x)", async () => {
    const script = workedExampleScript(liveMessages);
    const { controller } = await conductWorkedExample(script);
    // 1 DLT in 3 patients at dose 2 → cell (n=3, x=1).
    expect(controller.viewModel.highlight).toEqual({ n: 3, x: 1 });
  });

  it("records the full decision history with verbatim messages", async () => {
    const script = workedExampleScript(liveMessages);
    const { controller, els } = await conductWorkedExample(script);
    expect(
      controller.viewModel.history.map((h) => [h.dose, h.dltCount, h.message]),
    ).toEqual([
      [1, 0, "Escalate to dose 2."],
      [2, 1, "Stay at dose 2."],
    ]);
    expect(els.history.innerHTML).toContain("Escalate to dose 2.");
    expect(els.history.innerHTML).toContain("Stay at dose 2.");
    expect(els.summary.textContent).toContain("selected MTD: dose 2");
  });

  it("computes no decision strings locally: sentinel messages pass through untouched", async () => {
    // If any displayed decision text were produced by the UI, it could not
    // contain these strings (they exist only in the scripted responses) and
    // would instead contain recognizable decision words — assert both ways.
    const sentinels = {
      first: "sentinel-alpha-9Q4",
      second: "sentinel-bravo-2K8",
      final: "sentinel-charlie-5Z1",
    };
    const script = workedExampleScript(sentinels);
    const { els, banners } = await conductWorkedExample(script);
    expect(banners).toEqual([
      "sentinel-alpha-9Q4",
      "sentinel-bravo-2K8",
      "sentinel-charlie-5Z1",
    ]);
    const displayed = [
      banners.join("\n"),
      els.history.innerHTML,
    ].join("\n");
    for (const word of ["Escalate", "Stay", "De-escalate", "Terminate", "MTD is"])
      expect(displayed).not.toContain(word);
  });
});

describe("error handling during conduct", () => {
  it("surfaces service validation problems inline and keeps state", async () => {
    const script = new FetchScript();
    script.reply(session());
    script.reply(
      {
        type: "about:blank",
        title: "Invalid cohort entry",
        status: 400,
        detail: "dlt_count must be between 0 and cohort_size=3",
        code: "invalid_cohort",
      },
      400,
    );
    const controller = new ConductController(new ApiClient(script.fetch));
    await controller.createTrial({
      design: "i3p3",
      p_target: 0.3,
      eps_lo: 0.05,
      eps_hi: 0.05,
    });
    await controller.submitCohort(3, 3);
    const vm = controller.viewModel;
    expect(vm.banner.kind).toBe("error");
    expect(vm.banner.text).toContain("Invalid cohort entry");
    expect(vm.entryDisabled).toBe(false); // retry affordance
    expect(vm.history).toHaveLength(0);
    expect(vm.totalPatients).toBe(0);
  });

  it("leaves local state unchanged when the network is down", async () => {
    const script = new FetchScript();
    script.reply(session());
    const controller = new ConductController(new ApiClient(script.fetch));
    await controller.createTrial({
      design: "i3p3",
      p_target: 0.3,
      eps_lo: 0.05,
      eps_hi: 0.05,
    });
    // Next request is unscripted → the fake fetch throws like a dead socket.
    await controller.submitCohort(3, 0);
    const vm = controller.viewModel;
    expect(vm.banner.kind).toBe("error");
    expect(vm.banner.text).toMatch(/retry/i);
    expect(vm.sessionId).toBe("7edc59b92b16400d9fab838e7185c10b");
    expect(vm.history).toHaveLength(0);
    expect(vm.entryDisabled).toBe(false);
  });
});
