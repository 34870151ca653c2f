import { ApiClient } from "./api.js";
import { SequencePlayer, buildSequence } from "./player.js";
import { RefreshController } from "./refresh.js";
import { renderOverlay } from "./render.js";
import { GridEditor } from "./state.js";
import type { ModelInfo, OverlayMode, Tool } from "./types.js";

const api = new ApiClient("");
const canvas = document.getElementById("grid") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const modelSelect = document.getElementById("model") as HTMLSelectElement;
const modeSelect = document.getElementById("mode") as HTMLSelectElement;
const toolButtons = Array.from(document.querySelectorAll<HTMLButtonElement>("[data-tool]"));
const hint = document.getElementById("hint")!;
const toast = document.getElementById("toast")!;
const latency = document.getElementById("latency")!;
const scrub = document.getElementById("scrub") as HTMLInputElement;

let models: ModelInfo[] = [];
let editor = new GridEditor(32);
let controller: RefreshController;
let player: SequencePlayer;

function activeModel(): ModelInfo | undefined {
  return models.find((m) => m.model_id === modelSelect.value);
}

function showToast(message: string): void {
  toast.textContent = message;
  toast.classList.add("visible");
  setTimeout(() => toast.classList.remove("visible"), 2500);
}

function draw(): void {
  const model = activeModel();
  const overlay = controller.overlay;
  const rgba = renderOverlay({
    size: editor.size,
    mode: controller.mode,
    prediction: overlay?.prediction,
    oracle: overlay?.oracle,
    occupancy: editor.occupancy,
    transmitters: editor.transmitters,
    floorDbm: model?.norm.floor_dbm ?? -100,
    ceilDbm: model?.norm.ceil_dbm ?? 0,
  });
  const image = new ImageData(new Uint8ClampedArray(rgba), editor.size, editor.size);
  const off = new OffscreenCanvas(editor.size, editor.size);
  off.getContext("2d")!.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  hint.textContent = controller.lastHint;
  const ms = overlay?.prediction?.latency_ms;
  latency.textContent = ms !== undefined ? `${ms.toFixed(1)} ms` : "";
}

function cellFromEvent(event: MouseEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  const x = Math.floor(((event.clientX - rect.left) / rect.width) * editor.size);
  const y = Math.floor(((event.clientY - rect.top) / rect.height) * editor.size);
  return { x, y };
}

function applyEdit(x: number, y: number, tool: Tool): void {
  const result = editor.editCell(x, y, tool);
  if (result.rejected) showToast(result.rejected);
  if (result.changed) {
    controller.requestRefresh();
    draw();
  }
}

function setupEditor(size: number): void {
  editor = new GridEditor(size);
  controller = new RefreshController(api, editor, () => draw(), showToast);
  controller.modelId = modelSelect.value || null;
  controller.mode = modeSelect.value as OverlayMode;
  player = new SequencePlayer(api, () => drawAnimationFrame());
  draw();
}

function drawAnimationFrame(): void {
  const model = activeModel();
  const frame = player.frames[player.index];
  if (!frame || !model) return;
  const rgba = renderOverlay({
    size: editor.size,
    mode: "prediction",
    prediction: frame,
    occupancy: editor.occupancy,
    transmitters: editor.transmitters,
    floorDbm: model.norm.floor_dbm,
    ceilDbm: model.norm.ceil_dbm,
  });
  const image = new ImageData(new Uint8ClampedArray(rgba), editor.size, editor.size);
  const off = new OffscreenCanvas(editor.size, editor.size);
  off.getContext("2d")!.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  scrub.value = String(player.index);
}

let dragging = false;
canvas.addEventListener("mousedown", (event) => {
  if (event.button === 2) {
    const { x, y } = cellFromEvent(event);
    applyEdit(x, y, "place-transmitter"); // right-click toggles a transmitter
    return;
  }
  dragging = true;
  const { x, y } = cellFromEvent(event);
  applyEdit(x, y, editor.tool);
});
canvas.addEventListener("mousemove", (event) => {
  if (!dragging) return;
  const { x, y } = cellFromEvent(event);
  applyEdit(x, y, editor.tool);
});
window.addEventListener("mouseup", () => (dragging = false));
canvas.addEventListener("contextmenu", (event) => event.preventDefault());

for (const button of toolButtons) {
  button.addEventListener("click", () => {
    editor.tool = button.dataset.tool as Tool;
    toolButtons.forEach((b) => b.classList.toggle("active", b === button));
  });
}

document.getElementById("undo")!.addEventListener("click", () => {
  if (editor.undo()) {
    controller.requestRefresh();
    draw();
  }
});
document.getElementById("redo")!.addEventListener("click", () => {
  if (editor.redo()) {
    controller.requestRefresh();
    draw();
  }
});
document.getElementById("clear")!.addEventListener("click", () => {
  editor.clear();
  controller.requestRefresh();
  draw();
});

document.getElementById("export")!.addEventListener("click", () => {
  const blob = new Blob([JSON.stringify(editor.toSceneDoc())], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "scene.json";
  a.click();
  URL.revokeObjectURL(a.href);
});

modeSelect.addEventListener("change", () => {
  controller.mode = modeSelect.value as OverlayMode;
  controller.flush();
});
modelSelect.addEventListener("change", () => {
  const model = activeModel();
  if (model) setupEditor(model.frame_size);
});

document.getElementById("animate")!.addEventListener("click", async () => {
  if (editor.transmitters.length === 0) {
    showToast("place a transmitter first");
    return;
  }
  const size = editor.size;
  const rect = { width: Math.max(2, size / 16), height: Math.max(3, size / 8) };
  const row = Math.floor(size / 2 - rect.height / 2);
  const xs = [0.75, 0.55, 0.35, 0.15].map((f) => Math.floor(size * f));
  try {
    const scenes = buildSequence(editor.toSceneDoc(), rect, xs.map((x) => ({ x, y: row })));
    const count = await player.load(scenes, modelSelect.value);
    scrub.max = String(count - 1);
    player.scrub(0);
    player.play();
  } catch (err) {
    showToast(err instanceof Error ? err.message : String(err));
  }
});
document.getElementById("pause")!.addEventListener("click", () => player.pause());
scrub.addEventListener("input", () => {
  player.pause();
  player.scrub(Number(scrub.value));
});

async function boot(): Promise<void> {
  try {
    models = await api.models();
  } catch {
    hint.textContent = "cannot reach the coverage service; start `radiocov serve`";
    return;
  }
  modelSelect.innerHTML = "";
  for (const m of models) {
    const option = document.createElement("option");
    option.value = m.model_id;
    option.textContent = `${m.model_id} (${m.frame_size}x${m.frame_size})`;
    modelSelect.appendChild(option);
  }
  if (models.length > 0) {
    modelSelect.value = models[0].model_id;
    setupEditor(models[0].frame_size);
    controller.flush();
  } else {
    hint.textContent = "no checkpoints loaded; pass --checkpoint to `radiocov serve`";
    setupEditor(32);
  }
}

void boot();
