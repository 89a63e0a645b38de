import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import {
  RiskRequester,
  UiState,
  clampHour,
  clampMonth,
  initialState,
  riskParams,
} from "../src/state";
import { jsonResponse, makeRisk } from "./fixtures";

describe("control clamping", () => {
  it("keeps hour within 0..23", () => {
    expect(clampHour(-1)).toBe(0);
    expect(clampHour(24)).toBe(23);
    expect(clampHour(12.6)).toBe(13);
  });

  it("keeps month within 1..12", () => {
    expect(clampMonth(0)).toBe(1);
    expect(clampMonth(13)).toBe(12);
  });
});

describe("riskParams", () => {
  it("is null without a selected location", () => {
    expect(riskParams(initialState())).toBeNull();
  });

  it("clamps controls and passes the temperature override through", () => {
    const state = initialState();
    state.selectedLocation = { lat: 43.2, lon: -77.6 };
    state.hour = 30;
    state.month = 0;
    state.tempOverride = 28.5;
    expect(riskParams(state)).toEqual({
      lat: 43.2,
      lon: -77.6,
      hour: 23,
      month: 1,
      temp_f: 28.5,
    });
  });
});

function withLocation(): UiState {
  const state = initialState();
  state.selectedLocation = { lat: 43.16, lon: -77.61 };
  return state;
}

describe("RiskRequester", () => {
  it("applies a successful response and clears the stale flag", async () => {
    const report = makeRisk();
    const api = new ApiClient("", async () => jsonResponse(report));
    const requester = new RiskRequester(api, () => {});
    const state = withLocation();
    await requester.submit(state);
    expect(state.lastReport).toEqual(report);
    expect(state.stale).toBe(false);
    expect(state.banner).toBeNull();
  });

  it("marks the panel stale while a request is in flight", async () => {
    let release!: (r: Response) => void;
    const gate = new Promise<Response>((res) => (release = res));
    const api = new ApiClient("", () => gate);
    const observed: boolean[] = [];
    const requester = new RiskRequester(api, (s) => observed.push(s.stale));
    const state = withLocation();
    const done = requester.submit(state);
    expect(observed).toEqual([true]);
    release(jsonResponse(makeRisk()));
    await done;
    expect(observed).toEqual([true, false]);
  });

  it("latest wins: an overtaken earlier response is discarded", async () => {
    const resolvers: Array<(r: Response) => void> = [];
    const api = new ApiClient(
      "",
      () => new Promise<Response>((res) => resolvers.push(res)),
    );
    const requester = new RiskRequester(api, () => {});
    const state = withLocation();
    const first = requester.submit(state);
    state.hour = 20;
    const second = requester.submit(state);
    // second (newer) response lands first, then the stale first response
    resolvers[1](jsonResponse(makeRisk({ hour: 20, model_version: "new" })));
    await second;
    resolvers[0](jsonResponse(makeRisk({ hour: 12, model_version: "old" })));
    await first;
    expect(state.lastReport?.model_version).toBe("new");
    expect(state.stale).toBe(false);
  });

  it("renders a model-loading banner on 503, never silently", async () => {
    const api = new ApiClient("", async () =>
      jsonResponse({ detail: "loading" }, 503),
    );
    const requester = new RiskRequester(api, () => {});
    const state = withLocation();
    await requester.submit(state);
    expect(state.banner).toMatch(/loading/i);
    expect(state.lastReport).toBeNull();
  });

  it("reports network failures as a banner", async () => {
    const api = new ApiClient("", async () => {
      throw new TypeError("fetch failed");
    });
    const requester = new RiskRequester(api, () => {});
    const state = withLocation();
    await requester.submit(state);
    expect(state.banner).toMatch(/unreachable/i);
  });
});
