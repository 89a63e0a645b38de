import { ApiClient, ApiError, RiskParams } from "./api";
import type { CrimeType, GeoPoint, RiskResponse } from "./types";

export interface UiState {
  selectedLocation: GeoPoint | null;
  hour: number;
  month: number;
  tempOverride: number | null;
  activeCrimeLayer: CrimeType;
  lastReport: RiskResponse | null;
  /** True while a newer request than lastReport is in flight. */
  stale: boolean;
  banner: string | null;
}

export function initialState(): UiState {
  return {
    selectedLocation: null,
    hour: 12,
    month: 6,
    tempOverride: null,
    activeCrimeLayer: "larceny",
    lastReport: null,
    stale: false,
    banner: null,
  };
}

const clampInt = (v: number, lo: number, hi: number) =>
  Math.min(hi, Math.max(lo, Math.round(v)));

/** Controls are clamped before request construction so normal use can
 * never produce a 422. */
export function clampHour(v: number): number {
  return clampInt(v, 0, 23);
}

export function clampMonth(v: number): number {
  return clampInt(v, 1, 12);
}

export function riskParams(state: UiState): RiskParams | null {
  if (!state.selectedLocation) return null;
  const params: RiskParams = {
    lat: state.selectedLocation.lat,
    lon: state.selectedLocation.lon,
    hour: clampHour(state.hour),
    month: clampMonth(state.month),
  };
  if (state.tempOverride !== null) params.temp_f = state.tempOverride;
  return params;
}

/** Issues risk requests with latest-wins semantics: a response is applied
 * only if no newer request has been started since it left. */
export class RiskRequester {
  private seq = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly onUpdate: (state: UiState) => void,
  ) {}

  async submit(state: UiState): Promise<void> {
    const params = riskParams(state);
    if (!params) return;
    const ticket = ++this.seq;
    state.stale = true;
    state.banner = null;
    this.onUpdate(state);
    try {
      const report = await this.api.risk(params);
      if (ticket !== this.seq) return; // superseded; discard
      state.lastReport = report;
      state.stale = false;
    } catch (err) {
      if (ticket !== this.seq) return;
      state.stale = false;
      if (err instanceof ApiError && err.status === 503) {
        state.banner = "Model is loading — try again shortly.";
      } else if (err instanceof ApiError) {
        state.banner = `Request failed (HTTP ${err.status}).`;
      } else {
        state.banner = "Network error — service unreachable.";
      }
    }
    this.onUpdate(state);
  }
}
