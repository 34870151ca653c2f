import type { AnimatePayload, CoveragePayload, ModelInfo, SceneDoc } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Thin JSON client for the coverage service. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload.error ?? `HTTP ${resp.status}`);
    }
    return payload as T;
  }

  async models(): Promise<ModelInfo[]> {
    const resp = await this.fetchFn(this.baseUrl + "/api/models");
    const payload = await resp.json();
    if (!resp.ok) throw new ApiError(resp.status, payload.error ?? "models failed");
    return payload.models as ModelInfo[];
  }

  predict(scene: SceneDoc, modelId: string): Promise<CoveragePayload> {
    return this.post("/api/predict", { scene, model_id: modelId });
  }

  simulate(scene: SceneDoc, modelId?: string): Promise<CoveragePayload> {
    return this.post("/api/simulate", { scene, model_id: modelId });
  }

  animate(scenes: SceneDoc[], modelId: string): Promise<AnimatePayload> {
    return this.post("/api/animate", { scenes, model_id: modelId });
  }
}
