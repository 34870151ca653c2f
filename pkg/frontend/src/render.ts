import type { CoveragePayload, OverlayMode } from "./types.js";

// Power ramp anchors, dark to hot (matches the server-side PNG export).
const RAMP: [number, number, number][] = [
  [8, 8, 40],
  [46, 22, 110],
  [142, 32, 120],
  [222, 82, 60],
  [252, 176, 52],
  [252, 252, 180],
];
export const BUILDING_RGB: [number, number, number] = [106, 13, 173]; // purple
export const TRANSMITTER_RGB: [number, number, number] = [40, 110, 255]; // blue dot

export function rampColor(unit: number): [number, number, number] {
  const u = Math.min(1, Math.max(0, unit));
  const pos = u * (RAMP.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.min(lo + 1, RAMP.length - 1);
  const f = pos - lo;
  return [
    Math.round(RAMP[lo][0] * (1 - f) + RAMP[hi][0] * f),
    Math.round(RAMP[lo][1] * (1 - f) + RAMP[hi][1] * f),
    Math.round(RAMP[lo][2] * (1 - f) + RAMP[hi][2] * f),
  ];
}

export interface RenderInputs {
  size: number;
  mode: OverlayMode;
  prediction?: CoveragePayload;
  oracle?: CoveragePayload;
  occupancy: Uint8Array;
  transmitters: { x: number; y: number }[];
  /** Fixed dBm color scale from the model's normalization, so colors stay
   *  comparable across edits. */
  floorDbm: number;
  ceilDbm: number;
}

/** Pure RGBA rasterization at grid resolution.
 *
 * Coverage payloads are read, never written: callers may hash them before
 * and after to prove the pipeline leaves server data untouched. Buildings
 * paint as an opaque purple layer over the heatmap and transmitters as
 * blue dots. Difference mode renders |prediction - oracle| in dB against a
 * fixed 0..20 dB scale.
 */
export function renderOverlay(inputs: RenderInputs): Uint8ClampedArray {
  const { size, mode, prediction, oracle } = inputs;
  const out = new Uint8ClampedArray(size * size * 4);
  const span = inputs.ceilDbm - inputs.floorDbm;

  const unitAt = (x: number, y: number): number => {
    if (mode === "prediction") {
      if (!prediction) return 0;
      return (prediction.coverage_dbm[y][x] - inputs.floorDbm) / span;
    }
    if (mode === "oracle") {
      if (!oracle) return 0;
      return (oracle.coverage_dbm[y][x] - inputs.floorDbm) / span;
    }
    if (!prediction || !oracle) return 0;
    const diff = Math.abs(prediction.coverage_dbm[y][x] - oracle.coverage_dbm[y][x]);
    return diff / 20.0;
  };

  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const i = (y * size + x) * 4;
      let rgb: [number, number, number];
      if (inputs.occupancy[y * size + x] === 1) {
        rgb = BUILDING_RGB;
      } else {
        rgb = rampColor(unitAt(x, y));
      }
      out[i] = rgb[0];
      out[i + 1] = rgb[1];
      out[i + 2] = rgb[2];
      out[i + 3] = 255;
    }
  }
  for (const t of inputs.transmitters) {
    const i = (t.y * size + t.x) * 4;
    out[i] = TRANSMITTER_RGB[0];
    out[i + 1] = TRANSMITTER_RGB[1];
    out[i + 2] = TRANSMITTER_RGB[2];
    out[i + 3] = 255;
  }
  return out;
}
