import { CRIME_TYPES, RiskResponse } from "./types";

const LABELS: Record<string, string> = {
  aggravated_assault: "Aggravated assault",
  burglary: "Burglary",
  larceny: "Larceny",
  motor_vehicle_theft: "Motor vehicle theft",
  murder: "Murder",
  robbery: "Robbery",
};

/** Renders the six probabilities into the panel. Displayed numbers are the
 * API's values verbatim (String() of the JSON number) — the UI never
 * rounds, recomputes, or fabricates them. */
export function renderRiskPanel(
  panel: HTMLElement,
  report: RiskResponse | null,
  stale: boolean,
): void {
  if (!report) {
    panel.innerHTML = '<p class="hint">Click the map to query risk.</p>';
    return;
  }
  const rows = CRIME_TYPES.map(
    (t) =>
      `<tr><td>${LABELS[t]}</td>` +
      `<td class="prob" data-crime="${t}">${String(report.probabilities[t])}</td></tr>`,
  ).join("");
  panel.innerHTML =
    `<table class="risk${stale ? " stale" : ""}"><tbody>${rows}</tbody></table>` +
    `<p class="meta">mode: <span data-field="mode">${report.mode}</span>` +
    (report.geoid ? ` · geoid: <span data-field="geoid">${report.geoid}</span>` : "") +
    ` · model: <span data-field="model_version">${report.model_version}</span></p>`;
}

export function renderBanner(el: HTMLElement, message: string | null): void {
  el.textContent = message ?? "";
  el.hidden = message === null;
}
