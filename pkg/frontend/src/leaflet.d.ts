// Minimal typings for the Leaflet global loaded from the CDN script tag.
// Only the surface this client touches is declared.

declare namespace L {
  type LatLngTuple = [number, number];

  interface LeafletMouseEvent {
    latlng: { lat: number; lng: number };
  }

  interface Layer {
    addTo(map: Map): this;
    remove(): this;
  }

  interface PathOptions {
    color?: string;
    weight?: number;
    fillColor?: string;
    fillOpacity?: number;
    opacity?: number;
    stroke?: boolean;
  }

  interface Map {
    setView(center: LatLngTuple, zoom: number): this;
    getCenter(): { lat: number; lng: number };
    on(event: "click", handler: (e: LeafletMouseEvent) => void): this;
    removeLayer(layer: Layer): this;
  }

  interface GeoJSONOptions {
    style?: (feature: any) => PathOptions;
  }

  function map(id: string | HTMLElement): Map;
  function tileLayer(urlTemplate: string, options?: { attribution?: string }): Layer;
  function geoJSON(data: any, options?: GeoJSONOptions): Layer;
  function marker(latlng: LatLngTuple): Layer;
  function circleMarker(latlng: LatLngTuple, options?: PathOptions): Layer;
}
