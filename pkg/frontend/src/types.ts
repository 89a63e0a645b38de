// JSON shapes of the three risk-service endpoints, field-for-field.

export const CRIME_TYPES = [
  "aggravated_assault",
  "burglary",
  "larceny",
  "motor_vehicle_theft",
  "murder",
  "robbery",
] as const;

export type CrimeType = (typeof CRIME_TYPES)[number];

export interface RiskResponse {
  lat: number;
  lon: number;
  hour: number;
  month: number;
  temp_f: number | null;
  probabilities: Record<CrimeType, number>;
  raw: Record<CrimeType, number>;
  geoid: string | null;
  mode: "geoid_average" | "refit_at_point";
  model_version: string;
}

export interface HealthResponse {
  status: "ok" | "loading";
  model_version: string | null;
  locals_count: number | null;
}

export interface HeatmapFeature {
  type: "Feature";
  geometry: { type: "Polygon"; coordinates: number[][][] };
  properties: { p: number | null; row: number; col: number };
}

export interface HeatmapDoc {
  type: "FeatureCollection";
  bbox: [number, number, number, number];
  crime_type: string;
  year: number | null;
  resolution: number;
  features: HeatmapFeature[];
}

export interface GeoPoint {
  lat: number;
  lon: number;
}
