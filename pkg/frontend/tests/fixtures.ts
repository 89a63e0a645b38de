import type { FetchLike } from "../src/api";
import type { HeatmapDoc, RiskResponse } from "../src/types";

export function makeRisk(overrides: Partial<RiskResponse> = {}): RiskResponse {
  return {
    lat: 43.16,
    lon: -77.61,
    hour: 12,
    month: 6,
    temp_f: null,
    probabilities: {
      aggravated_assault: 0.0512345678901234,
      burglary: 0.1987654321098765,
      larceny: 0.4123456789012345,
      motor_vehicle_theft: 0.0891234567890123,
      murder: 0.0012345678901234,
      robbery: 0.2473063044196299,
    },
    raw: {
      aggravated_assault: 0.0512345678901234,
      burglary: 0.1987654321098765,
      larceny: 0.4123456789012345,
      motor_vehicle_theft: 0.0891234567890123,
      murder: -0.0212345678901234,
      robbery: 0.2473063044196299,
    },
    geoid: "G007",
    mode: "geoid_average",
    model_version: "test-1",
    ...overrides,
  };
}

export function makeHeatmap(values: Array<number | null>): HeatmapDoc {
  const resolution = Math.round(Math.sqrt(values.length));
  const features = values.map((p, k) => {
    const row = Math.floor(k / resolution);
    const col = k % resolution;
    const lon0 = -77.7 + 0.05 * col;
    const lat0 = 43.1 + 0.04 * row;
    return {
      type: "Feature" as const,
      geometry: {
        type: "Polygon" as const,
        coordinates: [[
          [lon0, lat0],
          [lon0 + 0.05, lat0],
          [lon0 + 0.05, lat0 + 0.04],
          [lon0, lat0 + 0.04],
          [lon0, lat0],
        ]],
      },
      properties: { p, row, col },
    };
  });
  return {
    type: "FeatureCollection",
    bbox: [-77.7, 43.1, -77.5, 43.25],
    crime_type: "burglary",
    year: 2015,
    resolution,
    features,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** fetch stub that serves canned responses per URL substring and counts
 * calls; unmatched URLs get a 404. */
export function stubFetch(
  routes: Array<[string, () => Response]>,
): { fetch: FetchLike; calls: string[] } {
  const calls: string[] = [];
  const fetchImpl: FetchLike = async (url) => {
    calls.push(url);
    for (const [fragment, make] of routes) {
      if (url.includes(fragment)) return make();
    }
    return jsonResponse({ detail: "not found" }, 404);
  };
  return { fetch: fetchImpl, calls };
}
