/** Browser entry point: binds the real DOM and window.fetch to the
 * controllers and render functions.  All behavior lives in the imported
 * modules; this file is wiring only. */

import { ApiClient } from "./api.js";
import {
  ConductController,
  SimController,
  TableController,
} from "./controller.js";
import { renderConduct, renderSim, renderTable } from "./render.js";
import { simViewModel, tableViewModel } from "./viewmodels.js";
import type { ConductElements } from "./render.js";
import type { TableQuery } from "./types.js";

const $ = <T extends HTMLElement = HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const api = new ApiClient((input, init) => window.fetch(input, init));
const conduct = new ConductController(api);
const table = new TableController(api);
const sim = new SimController(api);

// ---------------------------------------------------------------------------
// Tabs
// ---------------------------------------------------------------------------

const tabIds = ["conduct", "table", "simulate"] as const;
for (const id of tabIds) {
  $(`tab-${id}`).addEventListener("click", () => {
    for (const other of tabIds) {
      $(`panel-${other}`).hidden = other !== id;
      $(`tab-${other}`).classList.toggle("tab-active", other === id);
    }
  });
}

// ---------------------------------------------------------------------------
// Conduct tab
// ---------------------------------------------------------------------------

const conductEls: ConductElements = {
  banner: $("conduct-banner"),
  doseCards: $("dose-cards"),
  history: $("history"),
  summary: $("conduct-summary"),
  cohortSubmit: $<HTMLButtonElement>("cohort-submit"),
  cohortSize: $<HTMLInputElement>("cohort-size"),
  dltCount: $<HTMLInputElement>("dlt-count"),
  finalize: $<HTMLButtonElement>("finalize"),
};

const num = (id: string): number => Number($<HTMLInputElement>(id).value);

function repaintConduct(): void {
  const vm = conduct.viewModel;
  renderConduct(vm, conductEls);
  // Keep the explorer grid in sync with the active trial's position.
  if (table.state.payload)
    renderTable(tableViewModel(table.state.payload, vm.highlight), {
      set innerHTML(html: string) {
        $("table-grid").innerHTML = html;
      },
      get innerHTML() {
        return $("table-grid").innerHTML;
      },
    });
}

$("trial-create").addEventListener("click", async () => {
  await conduct.createTrial({
    design: $<HTMLSelectElement>("trial-design").value,
    p_target: num("trial-pt"),
    eps_lo: num("trial-eps-lo"),
    eps_hi: num("trial-eps-hi"),
    n_doses: num("trial-n-doses"),
  });
  repaintConduct();
});

$("cohort-submit").addEventListener("click", async () => {
  await conduct.submitCohort(num("cohort-size"), num("dlt-count"));
  repaintConduct();
});

$("finalize").addEventListener("click", async () => {
  const force = conduct.viewModel.status === "Active";
  await conduct.finalize(force);
  repaintConduct();
});

// ---------------------------------------------------------------------------
// Table tab
// ---------------------------------------------------------------------------

function tableQuery(): TableQuery {
  return {
    pt: num("table-pt"),
    eps_lo: num("table-eps-lo"),
    eps_hi: num("table-eps-hi"),
    max_n: num("table-max-n"),
  };
}

async function repaintTable(): Promise<void> {
  await table.load(tableQuery());
  $("table-error").textContent = table.state.error ?? "";
  if (table.state.payload)
    renderTable(
      tableViewModel(table.state.payload, conduct.viewModel.highlight),
      $("table-grid"),
    );
  $<HTMLAnchorElement>("table-csv").href = table.csvUrl();
}

$("table-load").addEventListener("click", () => void repaintTable());
for (const id of ["table-pt", "table-eps-lo", "table-eps-hi", "table-max-n"])
  $(id).addEventListener("change", () => void repaintTable());

// ---------------------------------------------------------------------------
// Simulate tab
// ---------------------------------------------------------------------------

async function pollSim(): Promise<void> {
  const again = await sim.poll();
  if (sim.state.record) renderSim(simVm(), $("sim-output"));
  $("sim-error").textContent = sim.state.error ?? "";
  if (again) setTimeout(() => void pollSim(), 500);
}

const simVm = () => simViewModel(sim.state.record!);

$("sim-run").addEventListener("click", async () => {
  await sim.submit({
    design: $<HTMLSelectElement>("sim-design").value,
    p_target: num("sim-pt"),
    eps_lo: num("sim-eps-lo"),
    eps_hi: num("sim-eps-hi"),
    builtin: $<HTMLInputElement>("sim-scenario").value,
    n_trials: num("sim-n-trials"),
    seed: num("sim-seed"),
  });
  $("sim-error").textContent = sim.state.error ?? "";
  if (sim.state.record) {
    renderSim(simVm(), $("sim-output"));
    void pollSim();
  }
});

// Initial paint.
repaintConduct();
void repaintTable();
