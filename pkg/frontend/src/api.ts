import type { CrimeType, HealthResponse, HeatmapDoc, RiskResponse } from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`API error ${status}`);
  }
}

export interface RiskParams {
  lat: number;
  lon: number;
  hour: number;
  month: number;
  temp_f?: number;
}

export type FetchLike = (url: string) => Promise<Response>;

/** Thin client over the three documented endpoints, with a per-layer
 * heat-map cache so toggling a layer off and on costs one network fetch. */
export class ApiClient {
  private heatmapCache = new Map<string, HeatmapDoc>();

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url) => fetch(url),
  ) {}

  riskUrl(params: RiskParams): string {
    const q = new URLSearchParams({
      lat: String(params.lat),
      lon: String(params.lon),
      hour: String(params.hour),
      month: String(params.month),
    });
    if (params.temp_f !== undefined) q.set("temp_f", String(params.temp_f));
    return `${this.baseUrl}/api/risk?${q.toString()}`;
  }

  async risk(params: RiskParams): Promise<RiskResponse> {
    return this.getJson<RiskResponse>(this.riskUrl(params));
  }

  async heatmap(crimeType: CrimeType, year: number): Promise<HeatmapDoc> {
    const key = `${crimeType}/${year}`;
    const cached = this.heatmapCache.get(key);
    if (cached) return cached;
    const doc = await this.getJson<HeatmapDoc>(
      `${this.baseUrl}/api/heatmap/${crimeType}/${year}`,
    );
    this.heatmapCache.set(key, doc);
    return doc;
  }

  async health(): Promise<HealthResponse> {
    return this.getJson<HealthResponse>(`${this.baseUrl}/api/health`);
  }

  private async getJson<T>(url: string): Promise<T> {
    const res = await this.fetchImpl(url);
    if (!res.ok) {
      let detail: unknown = null;
      try {
        detail = await res.json();
      } catch {
        // non-JSON error body; status alone is enough
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }
}
