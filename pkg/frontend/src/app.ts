import { ApiClient } from "./api";
import { legendEntries } from "./color";
import { heatmapLayer } from "./heatmap";
import { locateMe } from "./locate";
import { renderBanner, renderRiskPanel } from "./panel";
import { RiskRequester, UiState, clampHour, clampMonth, initialState } from "./state";
import { CRIME_TYPES, CrimeType } from "./types";

const API_BASE = (window as any).CRIMEGWR_API_BASE ?? "";
const ROCHESTER_CENTER: L.LatLngTuple = [43.175, -77.6];
const HEATMAP_YEAR = 2015;

const api = new ApiClient(API_BASE);
const state: UiState = initialState();

const map = L.map("map").setView(ROCHESTER_CENTER, 12);
L.tileLayer("https://tile.openstreetmap.org/{z}/{x}/{y}.png", {
  attribution: "&copy; OpenStreetMap contributors",
}).addTo(map);

let marker: L.Layer | null = null;
let overlay: L.Layer | null = null;

const panel = document.getElementById("risk-panel")!;
const banner = document.getElementById("banner")!;
const hourInput = document.getElementById("hour") as HTMLInputElement;
const monthInput = document.getElementById("month") as HTMLInputElement;
const tempInput = document.getElementById("temp") as HTMLInputElement;
const layerSelect = document.getElementById("layer") as HTMLSelectElement;
const layerToggle = document.getElementById("layer-on") as HTMLInputElement;

function redraw(s: UiState): void {
  renderRiskPanel(panel, s.lastReport, s.stale);
  renderBanner(banner, s.banner);
}

const requester = new RiskRequester(api, redraw);

function readControls(): void {
  state.hour = clampHour(Number(hourInput.value));
  state.month = clampMonth(Number(monthInput.value));
  hourInput.value = String(state.hour);
  monthInput.value = String(state.month);
  state.tempOverride = tempInput.value === "" ? null : Number(tempInput.value);
}

function setLocation(lat: number, lon: number): void {
  state.selectedLocation = { lat, lon };
  if (marker) map.removeLayer(marker);
  marker = L.marker([lat, lon]).addTo(map);
}

map.on("click", (e) => {
  setLocation(e.latlng.lat, e.latlng.lng);
  readControls();
  void requester.submit(state);
});

for (const input of [hourInput, monthInput, tempInput]) {
  input.addEventListener("change", () => {
    readControls();
    void requester.submit(state);
  });
}

async function refreshOverlay(): Promise<void> {
  if (overlay) {
    map.removeLayer(overlay);
    overlay = null;
  }
  if (!layerToggle.checked) return;
  try {
    const doc = await api.heatmap(state.activeCrimeLayer, HEATMAP_YEAR);
    overlay = heatmapLayer(doc).addTo(map);
  } catch {
    state.banner = `No heat map for ${state.activeCrimeLayer}/${HEATMAP_YEAR}.`;
    redraw(state);
  }
}

layerSelect.innerHTML = CRIME_TYPES.map(
  (t) => `<option value="${t}">${t.replace(/_/g, " ")}</option>`,
).join("");
layerSelect.value = state.activeCrimeLayer;
layerSelect.addEventListener("change", () => {
  state.activeCrimeLayer = layerSelect.value as CrimeType;
  void refreshOverlay();
});
layerToggle.addEventListener("change", () => void refreshOverlay());

document.getElementById("legend")!.innerHTML = legendEntries(5)
  .map(
    (e) =>
      `<span class="swatch" style="background:${e.color}"></span>${e.value.toFixed(1)}`,
  )
  .join(" ");

document.getElementById("locate")!.addEventListener("click", async () => {
  const center = map.getCenter();
  const result = await locateMe({ lat: center.lat, lon: center.lng });
  if (result.source === "fallback") {
    state.banner = "Location unavailable — using map center.";
    redraw(state);
  }
  setLocation(result.location.lat, result.location.lon);
  readControls();
  void requester.submit(state);
});

void refreshOverlay();
redraw(state);
