import type { SceneDoc, Tool } from "./types.js";

export interface EditResult {
  changed: boolean;
  /** Edits that would put a transmitter on a building are rejected, not
   *  silently dropped; the UI surfaces this flag as a visible warning. */
  rejected?: string;
}

const DEFAULT_POWER_DBM = 46.99; // 50 W
const DEFAULT_HEIGHT_M = 6.0;
const UNDO_LIMIT = 64; // comfortably above the 50-step guarantee

interface Snapshot {
  occupancy: Uint8Array;
  transmitters: { x: number; y: number }[];
}

/** Editable grid: building occupancy plus transmitter markers.
 *
 * Transmitters and buildings never coincide; painting over a transmitter
 * removes it first, while placing a transmitter on a building is rejected.
 * Every mutating edit pushes a snapshot onto a bounded undo stack.
 */
export class GridEditor {
  readonly size: number;
  occupancy: Uint8Array;
  transmitters: { x: number; y: number }[] = [];
  tool: Tool = "draw-building";
  /** Bumped on every content change; responses carrying an older sequence
   *  number are stale and must be discarded. */
  seq = 0;

  private undoStack: Snapshot[] = [];
  private redoStack: Snapshot[] = [];

  constructor(size: number) {
    this.size = size;
    this.occupancy = new Uint8Array(size * size);
  }

  private inBounds(x: number, y: number): boolean {
    return Number.isInteger(x) && Number.isInteger(y) &&
      x >= 0 && x < this.size && y >= 0 && y < this.size;
  }

  private snapshot(): Snapshot {
    return {
      occupancy: this.occupancy.slice(),
      transmitters: this.transmitters.map((t) => ({ ...t })),
    };
  }

  private pushUndo(): void {
    this.undoStack.push(this.snapshot());
    if (this.undoStack.length > UNDO_LIMIT) this.undoStack.shift();
    this.redoStack.length = 0;
  }

  private restore(s: Snapshot): void {
    this.occupancy = s.occupancy.slice();
    this.transmitters = s.transmitters.map((t) => ({ ...t }));
    this.seq += 1;
  }

  buildingAt(x: number, y: number): boolean {
    return this.occupancy[y * this.size + x] === 1;
  }

  transmitterIndexAt(x: number, y: number): number {
    return this.transmitters.findIndex((t) => t.x === x && t.y === y);
  }

  /** Apply the active tool at a cell. Out-of-bounds clicks are ignored. */
  editCell(x: number, y: number, tool: Tool = this.tool): EditResult {
    if (!this.inBounds(x, y)) return { changed: false };
    switch (tool) {
      case "draw-building": {
        const idx = y * this.size + x;
        const txIdx = this.transmitterIndexAt(x, y);
        if (this.occupancy[idx] === 1 && txIdx < 0) return { changed: false };
        this.pushUndo();
        if (txIdx >= 0) this.transmitters.splice(txIdx, 1); // paint removes the transmitter
        this.occupancy[idx] = 1;
        this.seq += 1;
        return { changed: true };
      }
      case "erase-building": {
        const idx = y * this.size + x;
        if (this.occupancy[idx] === 0) return { changed: false };
        this.pushUndo();
        this.occupancy[idx] = 0;
        this.seq += 1;
        return { changed: true };
      }
      case "place-transmitter": {
        const existing = this.transmitterIndexAt(x, y);
        if (existing >= 0) {
          // toggle: clicking an existing transmitter removes it
          this.pushUndo();
          this.transmitters.splice(existing, 1);
          this.seq += 1;
          return { changed: true };
        }
        if (this.buildingAt(x, y)) {
          return { changed: false, rejected: "transmitters cannot sit on buildings" };
        }
        this.pushUndo();
        this.transmitters.push({ x, y });
        this.seq += 1;
        return { changed: true };
      }
      case "remove-transmitter": {
        const idx = this.transmitterIndexAt(x, y);
        if (idx < 0) return { changed: false };
        this.pushUndo();
        this.transmitters.splice(idx, 1);
        this.seq += 1;
        return { changed: true };
      }
    }
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  get canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.redoStack.push(this.snapshot());
    this.restore(prev);
    return true;
  }

  redo(): boolean {
    const next = this.redoStack.pop();
    if (!next) return false;
    this.undoStack.push(this.snapshot());
    this.restore(next);
    return true;
  }

  clear(): void {
    this.pushUndo();
    this.occupancy.fill(0);
    this.transmitters.length = 0;
    this.seq += 1;
  }

  /** Scene document in the exact JSON schema the CLI and service consume. */
  toSceneDoc(regionId = "designer"): SceneDoc {
    return {
      region_id: regionId,
      width: this.size,
      height: this.size,
      cell_size_m: 1.0,
      occupancy: Array.from(this.occupancy),
      transmitters: this.transmitters.map((t) => ({
        x: t.x,
        y: t.y,
        power_dbm: DEFAULT_POWER_DBM,
        height_m: DEFAULT_HEIGHT_M,
      })),
    };
  }

  loadSceneDoc(doc: SceneDoc): void {
    if (doc.width !== this.size || doc.height !== this.size) {
      throw new Error(`scene is ${doc.width}x${doc.height}, editor is ${this.size}`);
    }
    this.pushUndo();
    this.occupancy = Uint8Array.from(doc.occupancy);
    this.transmitters = doc.transmitters.map((t) => ({ x: t.x, y: t.y }));
    this.seq += 1;
  }
}
