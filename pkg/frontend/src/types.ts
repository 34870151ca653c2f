// Wire formats shared with the HTTP service.

export interface TransmitterDoc {
  x: number;
  y: number;
  power_dbm: number;
  height_m: number;
}

export interface SceneDoc {
  region_id: string;
  width: number;
  height: number;
  cell_size_m: number;
  occupancy: number[]; // 0|1, row-major, y increases downward
  transmitters: TransmitterDoc[];
}

export interface CoveragePayload {
  coverage_norm: number[][];
  coverage_dbm: number[][];
  latency_ms?: number;
  model_id?: string;
}

export interface AnimatePayload {
  model_id: string;
  latency_ms: number;
  frames: CoveragePayload[];
}

export interface ModelInfo {
  model_id: string;
  frame_size: number;
  input_channels: number;
  encoding: string;
  norm: { floor_dbm: number; ceil_dbm: number };
  params: number;
}

export type Tool =
  | "draw-building"
  | "erase-building"
  | "place-transmitter"
  | "remove-transmitter";

export type OverlayMode = "prediction" | "oracle" | "difference";
