/** Fixed [0, 1] color scale so layers are comparable across crime types
 * and years: deep blue at 0 through yellow to red at 1. */

const STOPS: Array<[number, [number, number, number]]> = [
  [0.0, [33, 53, 160]],
  [0.25, [64, 142, 198]],
  [0.5, [245, 222, 66]],
  [0.75, [240, 130, 40]],
  [1.0, [200, 30, 30]],
];

function hex2(v: number): string {
  return Math.round(v).toString(16).padStart(2, "0");
}

export function riskColor(p: number): string {
  const t = Math.min(1, Math.max(0, p));
  for (let k = 1; k < STOPS.length; k++) {
    const [t1, c1] = STOPS[k];
    if (t <= t1) {
      const [t0, c0] = STOPS[k - 1];
      const f = t1 === t0 ? 0 : (t - t0) / (t1 - t0);
      return (
        "#" +
        hex2(c0[0] + f * (c1[0] - c0[0])) +
        hex2(c0[1] + f * (c1[1] - c0[1])) +
        hex2(c0[2] + f * (c1[2] - c0[2]))
      );
    }
  }
  return "#" + hex2(200) + hex2(30) + hex2(30);
}

export interface LegendEntry {
  value: number;
  color: string;
}

export function legendEntries(steps = 5): LegendEntry[] {
  const out: LegendEntry[] = [];
  for (let k = 0; k <= steps; k++) {
    const value = k / steps;
    out.push({ value, color: riskColor(value) });
  }
  return out;
}
