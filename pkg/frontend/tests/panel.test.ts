// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { renderBanner, renderRiskPanel } from "../src/panel";
import { CRIME_TYPES } from "../src/types";
import { makeRisk } from "./fixtures";

function panel(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

describe("renderRiskPanel", () => {
  it("displays the API's probability values verbatim for all six types", () => {
    const report = makeRisk();
    const el = panel();
    renderRiskPanel(el, report, false);
    for (const t of CRIME_TYPES) {
      const cell = el.querySelector(`[data-crime="${t}"]`);
      expect(cell, t).not.toBeNull();
      expect(cell!.textContent).toBe(String(report.probabilities[t]));
    }
  });

  it("shows mode, geoid, and model version from the response", () => {
    const el = panel();
    renderRiskPanel(el, makeRisk(), false);
    expect(el.querySelector('[data-field="mode"]')!.textContent).toBe(
      "geoid_average",
    );
    expect(el.querySelector('[data-field="geoid"]')!.textContent).toBe("G007");
    expect(el.querySelector('[data-field="model_version"]')!.textContent).toBe(
      "test-1",
    );
  });

  it("omits the geoid when the response has none", () => {
    const el = panel();
    renderRiskPanel(el, makeRisk({ geoid: null, mode: "refit_at_point" }), false);
    expect(el.querySelector('[data-field="geoid"]')).toBeNull();
    expect(el.querySelector('[data-field="mode"]')!.textContent).toBe(
      "refit_at_point",
    );
  });

  it("marks the table stale while a newer request is pending", () => {
    const el = panel();
    renderRiskPanel(el, makeRisk(), true);
    expect(el.querySelector("table.risk")!.classList.contains("stale")).toBe(true);
  });

  it("renders a hint before the first query", () => {
    const el = panel();
    renderRiskPanel(el, null, false);
    expect(el.textContent).toMatch(/click the map/i);
  });
});

describe("renderBanner", () => {
  it("shows the message and hides when cleared", () => {
    const el = panel();
    renderBanner(el, "Model is loading");
    expect(el.hidden).toBe(false);
    expect(el.textContent).toBe("Model is loading");
    renderBanner(el, null);
    expect(el.hidden).toBe(true);
    expect(el.textContent).toBe("");
  });
});
