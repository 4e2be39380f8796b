/** DOM construction and rendering for the operator console.
 *
 * Rendering degrades gracefully where no 2D canvas context exists (jsdom);
 * the outline state that would be painted is asserted by tests instead.
 */

import { SelectionApi } from "./api.js";
import { Mode, SessionController } from "./state.js";

/** Errors are surfaced on the status line; the discarded promise must not
 * escalate to an unhandled rejection. */
function fire(p: Promise<unknown> | null): void {
  p?.catch(() => undefined);
}

const MODES: Array<[Mode, string]> = [
  ["select", "Select"],
  ["add", "Add part"],
  ["subtract", "Subtract part"],
  ["grasp", "Confirm grasp"],
  ["place", "Place point"],
];

/** Blob.arrayBuffer with a FileReader fallback for engines lacking it. */
function readFileBytes(file: Blob): Promise<Uint8Array> {
  if (typeof file.arrayBuffer === "function") {
    return file.arrayBuffer().then((buf) => new Uint8Array(buf));
  }
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(new Uint8Array(reader.result as ArrayBuffer));
    reader.onerror = () => reject(reader.error ?? new Error("file read failed"));
    reader.readAsArrayBuffer(file);
  });
}

export class OperatorConsole {
  readonly root: HTMLElement;
  readonly canvas: HTMLCanvasElement;
  readonly fileInput: HTMLInputElement;
  readonly statusLine: HTMLElement;
  readonly graspPanel: HTMLElement;
  readonly modeButtons = new Map<Mode, HTMLButtonElement>();
  readonly growButton: HTMLButtonElement;
  readonly shrinkButton: HTMLButtonElement;
  readonly resetButton: HTMLButtonElement;
  readonly deleteButton: HTMLButtonElement;
  readonly saliencyButton: HTMLButtonElement;
  private image: HTMLImageElement | null = null;
  private saliencyImage: HTMLImageElement | null = null;

  constructor(
    readonly controller: SessionController,
    doc: Document = document,
  ) {
    this.root = doc.createElement("div");
    this.root.className = "pats-console";

    const toolbar = doc.createElement("div");
    toolbar.className = "toolbar";

    this.fileInput = doc.createElement("input");
    this.fileInput.type = "file";
    this.fileInput.accept = "image/*";
    this.fileInput.id = "image-upload";
    toolbar.appendChild(this.fileInput);

    for (const [mode, label] of MODES) {
      const btn = doc.createElement("button");
      btn.textContent = label;
      btn.dataset.mode = mode;
      btn.addEventListener("click", () => this.controller.setMode(mode));
      this.modeButtons.set(mode, btn);
      toolbar.appendChild(btn);
    }

    this.growButton = doc.createElement("button");
    this.growButton.textContent = "Grow";
    this.growButton.id = "grow";
    this.growButton.addEventListener("click", () => fire(this.controller.grow()));
    this.shrinkButton = doc.createElement("button");
    this.shrinkButton.textContent = "Shrink";
    this.shrinkButton.id = "shrink";
    this.shrinkButton.addEventListener("click", () => fire(this.controller.shrink()));
    this.resetButton = doc.createElement("button");
    this.resetButton.textContent = "Reset parts";
    this.resetButton.id = "reset";
    this.resetButton.addEventListener("click", () => fire(this.controller.reset()));
    this.deleteButton = doc.createElement("button");
    this.deleteButton.textContent = "Delete selection";
    this.deleteButton.id = "delete";
    this.deleteButton.addEventListener("click", () => fire(this.controller.deleteSelection()));
    this.saliencyButton = doc.createElement("button");
    this.saliencyButton.textContent = "Saliency overlay";
    this.saliencyButton.id = "saliency-toggle";
    this.saliencyButton.addEventListener("click", () => {
      this.controller.toggleSaliency();
      void this.ensureSaliencyImage();
    });
    for (const b of [
      this.growButton,
      this.shrinkButton,
      this.resetButton,
      this.deleteButton,
      this.saliencyButton,
    ]) {
      toolbar.appendChild(b);
    }

    this.canvas = doc.createElement("canvas");
    this.canvas.className = "scene";
    this.canvas.addEventListener("click", (ev) => this.onCanvasClick(ev as MouseEvent));

    this.statusLine = doc.createElement("div");
    this.statusLine.className = "status";
    this.statusLine.textContent = "upload an image to start";

    this.graspPanel = doc.createElement("div");
    this.graspPanel.className = "grasp-panel";

    this.root.append(toolbar, this.canvas, this.statusLine, this.graspPanel);

    this.fileInput.addEventListener("change", () => void this.onUpload());
    // keyboard shortcuts are strictly additive; everything works by pointer
    doc.addEventListener("keydown", (ev) => {
      const kev = ev as KeyboardEvent;
      if (kev.key === "g") fire(this.controller.grow());
      else if (kev.key === "s") fire(this.controller.shrink());
      else if (kev.key === "Escape") fire(this.controller.deleteSelection());
    });

    this.controller.onChange(() => this.render());
  }

  private async onUpload(): Promise<void> {
    const file = this.fileInput.files?.[0];
    if (!file) return;
    try {
      const bytes = await readFileBytes(file);
      await this.controller.open(bytes, file.name);
      if (typeof URL.createObjectURL === "function") {
        const url = URL.createObjectURL(new Blob([bytes as unknown as BlobPart]));
        this.image = new Image();
        this.image.onload = () => this.render();
        this.image.src = url;
      }
      this.saliencyImage = null;
      this.render();
    } catch (err) {
      this.statusLine.textContent = `upload failed: ${(err as Error).message}`;
      this.statusLine.classList.add("error");
    }
  }

  private async ensureSaliencyImage(): Promise<void> {
    const s = this.controller.state;
    if (!s || this.saliencyImage) return;
    this.saliencyImage = new Image();
    this.saliencyImage.onload = () => this.render();
    this.saliencyImage.src = this.controller.api.saliencyUrl(s.sessionId);
  }

  /** Map a pointer event to image pixel coordinates. */
  eventToImage(ev: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    const scaleX = rect.width > 0 ? this.canvas.width / rect.width : 1;
    const scaleY = rect.height > 0 ? this.canvas.height / rect.height : 1;
    const x = Math.floor((ev.clientX - rect.left) * scaleX);
    const y = Math.floor((ev.clientY - rect.top) * scaleY);
    return [x, y];
  }

  private onCanvasClick(ev: MouseEvent): void {
    const [x, y] = this.eventToImage(ev);
    // out-of-bounds clicks are ignored; clickAt also guards no-session
    fire(this.controller.clickAt(x, y));
  }

  render(): void {
    const s = this.controller.state;
    if (s) {
      this.canvas.width = s.width;
      this.canvas.height = s.height;
      this.statusLine.textContent = s.lastStatus;
      this.statusLine.classList.toggle("error", /rejected|failed/.test(s.lastStatus));
      if (s.graspPoint) {
        this.graspPanel.textContent =
          `grasp point (${s.graspPoint[0]}, ${s.graspPoint[1]})` +
          (s.placePoint ? `, place point (${s.placePoint[0]}, ${s.placePoint[1]})` : "");
      }
      for (const [mode, btn] of this.modeButtons) {
        btn.classList.toggle("active", mode === s.mode);
      }
    }
    const ctx = this.canvas.getContext && this.canvas.getContext("2d");
    if (!ctx || !s) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    if (this.image) ctx.drawImage(this.image, 0, 0);
    if (s.saliencyVisible && this.saliencyImage) {
      ctx.globalAlpha = 0.5;
      ctx.drawImage(this.saliencyImage, 0, 0);
      ctx.globalAlpha = 1.0;
    }
    // combined mask outline (thin, cyan), then the active segment in green
    this.drawOutline(ctx, s.maskOutline, "#20d0d0", 1);
    this.drawOutline(ctx, s.activeOutline, "#10c020", 2);
    if (s.graspPoint) {
      ctx.strokeStyle = "#f02020";
      ctx.beginPath();
      ctx.arc(s.graspPoint[0] + 0.5, s.graspPoint[1] + 0.5, 4, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }

  private drawOutline(
    ctx: CanvasRenderingContext2D,
    outline: Array<Array<[number, number]>>,
    color: string,
    width: number,
  ): void {
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    for (const loop of outline) {
      if (loop.length < 2) continue;
      ctx.beginPath();
      ctx.moveTo(loop[0][0], loop[0][1]);
      for (const [x, y] of loop.slice(1)) ctx.lineTo(x, y);
      ctx.closePath();
      ctx.stroke();
    }
  }
}

export function mountApp(root: HTMLElement, baseUrl = ""): OperatorConsole {
  const controller = new SessionController(new SelectionApi(baseUrl));
  const app = new OperatorConsole(controller);
  root.appendChild(app.root);
  return app;
}
