import { riskColor } from "./color";
import type { HeatmapDoc, HeatmapFeature } from "./types";

export interface CellStyle {
  fillColor: string;
  fillOpacity: number;
  stroke: boolean;
}

/** Style for one grid cell. Cells with a null value (degenerate fits)
 * render fully transparent — absence of a prediction is not zero risk. */
export function cellStyle(feature: HeatmapFeature): CellStyle {
  const p = feature.properties.p;
  if (p === null) {
    return { fillColor: "#000000", fillOpacity: 0, stroke: false };
  }
  return { fillColor: riskColor(p), fillOpacity: 0.55, stroke: false };
}

export function heatmapLayer(doc: HeatmapDoc): L.Layer {
  return L.geoJSON(doc, {
    style: (feature) => cellStyle(feature as HeatmapFeature),
  });
}

/** The value each cell displays, keyed "row,col" — used to verify the
 * rendered layer against the served document. */
export function cellValues(doc: HeatmapDoc): Map<string, number | null> {
  const out = new Map<string, number | null>();
  for (const f of doc.features) {
    out.set(`${f.properties.row},${f.properties.col}`, f.properties.p);
  }
  return out;
}
