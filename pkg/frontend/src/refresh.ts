import type { ApiClient } from "./api.js";
import { Debouncer } from "./debounce.js";
import type { GridEditor } from "./state.js";
import type { CoveragePayload, OverlayMode } from "./types.js";

export const DEBOUNCE_MS = 150;

export interface Overlay {
  seq: number;
  mode: OverlayMode;
  prediction?: CoveragePayload;
  oracle?: CoveragePayload;
}

/** Orchestrates the edit -> request -> overlay loop.
 *
 * Edits are debounced on the trailing edge (150 ms); each request carries
 * the editor's sequence number at send time, and responses for anything
 * older than the newest edit are discarded so the overlay always matches
 * the latest grid. Without a transmitter no request goes out at all.
 */
export class RefreshController {
  requestsSent = 0;
  staleDropped = 0;
  lastHint = "";
  overlay: Overlay | null = null;

  private debouncer = new Debouncer(DEBOUNCE_MS);

  constructor(
    private readonly api: ApiClient,
    private readonly editor: GridEditor,
    private readonly onOverlay: (overlay: Overlay) => void,
    private readonly onError: (message: string) => void = () => {},
  ) {}

  modelId: string | null = null;
  mode: OverlayMode = "prediction";

  /** Call after every edit; collapses bursts into one request. */
  requestRefresh(): void {
    this.debouncer.schedule(() => void this.fire());
  }

  /** Bypass the debounce (initial paint, mode/model switches). */
  flush(): void {
    this.debouncer.cancel();
    void this.fire();
  }

  private async fire(): Promise<void> {
    if (this.editor.transmitters.length === 0) {
      this.lastHint = "place a transmitter to see coverage";
      return;
    }
    if (!this.modelId) {
      this.lastHint = "select a model";
      return;
    }
    this.lastHint = "";
    const seq = this.editor.seq;
    const scene = this.editor.toSceneDoc();
    const mode = this.mode;
    this.requestsSent += 1;
    try {
      const wantOracle = mode === "oracle" || mode === "difference";
      const wantPrediction = mode === "prediction" || mode === "difference";
      const [prediction, oracle] = await Promise.all([
        wantPrediction ? this.api.predict(scene, this.modelId) : Promise.resolve(undefined),
        wantOracle ? this.api.simulate(scene, this.modelId) : Promise.resolve(undefined),
      ]);
      if (seq < this.editor.seq) {
        this.staleDropped += 1; // superseded by a newer edit
        return;
      }
      this.overlay = { seq, mode, prediction, oracle };
      this.onOverlay(this.overlay);
    } catch (err) {
      // keep the last good overlay; surface a non-blocking message
      this.onError(err instanceof Error ? err.message : String(err));
    }
  }
}
