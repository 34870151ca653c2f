import type { ApiClient } from "./api.js";
import type { CoveragePayload, SceneDoc } from "./types.js";

export interface Waypoint {
  x: number;
  y: number;
}

export interface MovingRect {
  width: number;
  height: number;
}

/** Build the scene sequence for a rectangular object sliding along
 *  waypoints over a base grid. Throws naming the failing waypoint index
 *  when the rectangle leaves the grid. */
export function buildSequence(
  base: SceneDoc,
  rect: MovingRect,
  waypoints: Waypoint[],
): SceneDoc[] {
  return waypoints.map((wp, index) => {
    if (
      wp.x < 0 || wp.y < 0 ||
      wp.x + rect.width > base.width || wp.y + rect.height > base.height
    ) {
      throw new Error(`waypoint ${index} puts the object outside the grid`);
    }
    const occupancy = base.occupancy.slice();
    for (let dy = 0; dy < rect.height; dy++) {
      for (let dx = 0; dx < rect.width; dx++) {
        occupancy[(wp.y + dy) * base.width + (wp.x + dx)] = 1;
      }
    }
    const transmitters = base.transmitters.filter(
      (t) =>
        !(t.x >= wp.x && t.x < wp.x + rect.width && t.y >= wp.y && t.y < wp.y + rect.height),
    );
    if (transmitters.length === 0) {
      throw new Error(`waypoint ${index} covers every transmitter`);
    }
    return { ...base, occupancy, transmitters };
  });
}

/** Fetches an animation once and replays it with deterministic scrubbing. */
export class SequencePlayer {
  frames: CoveragePayload[] = [];
  index = 0;
  playing = false;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly onFrame: (frame: CoveragePayload, index: number) => void,
    private readonly intervalMs = 400,
  ) {}

  async load(scenes: SceneDoc[], modelId: string): Promise<number> {
    const payload = await this.api.animate(scenes, modelId);
    this.frames = payload.frames;
    this.index = 0;
    return this.frames.length;
  }

  scrub(index: number): CoveragePayload {
    if (index < 0 || index >= this.frames.length) {
      throw new Error(`frame ${index} out of range 0..${this.frames.length - 1}`);
    }
    this.index = index;
    const frame = this.frames[index];
    this.onFrame(frame, index);
    return frame;
  }

  play(): void {
    if (this.playing || this.frames.length === 0) return;
    this.playing = true;
    this.timer = setInterval(() => {
      this.scrub((this.index + 1) % this.frames.length);
    }, this.intervalMs);
  }

  pause(): void {
    this.playing = false;
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
