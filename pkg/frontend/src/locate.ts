import type { GeoPoint } from "./types";

export interface LocateResult {
  location: GeoPoint;
  source: "geolocation" | "fallback";
}

type GeolocationLike = {
  getCurrentPosition(
    onSuccess: (pos: { coords: { latitude: number; longitude: number } }) => void,
    onError: (err: unknown) => void,
  ): void;
} | undefined;

/** Browser geolocation with a map-center fallback on denial or absence. */
export function locateMe(
  fallback: GeoPoint,
  geolocation: GeolocationLike = typeof navigator !== "undefined"
    ? navigator.geolocation
    : undefined,
): Promise<LocateResult> {
  return new Promise((resolve) => {
    if (!geolocation) {
      resolve({ location: fallback, source: "fallback" });
      return;
    }
    geolocation.getCurrentPosition(
      (pos) =>
        resolve({
          location: { lat: pos.coords.latitude, lon: pos.coords.longitude },
          source: "geolocation",
        }),
      () => resolve({ location: fallback, source: "fallback" }),
    );
  });
}
