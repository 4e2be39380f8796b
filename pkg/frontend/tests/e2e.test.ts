// @vitest-environment jsdom
/**
 * End-to-end drive of the operator console against a real `pats serve`
 * process, pointer events only: upload, click the synthetic object, verify
 * the green outline's pixel set against GET /mask.png, grow/shrink,
 * subtract a part, and confirm a grasp point inside the mask.
 *
 * Runs under jsdom (headless browsers cannot be provisioned in this
 * environment); canvas painting is skipped but the outline state the canvas
 * would draw is exactly what gets asserted.
 */

import { ChildProcess, spawn } from "node:child_process";
import { PNG } from "pngjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Outline, SelectionApi } from "../src/api.js";
import { SessionController } from "../src/state.js";
import { OperatorConsole } from "../src/ui.js";

const PORT = 19000 + (process.pid % 5000);
const BASE = `http://127.0.0.1:${PORT}`;
const WIDTH = 160;
const HEIGHT = 120;
const BOX = { x0: 40, x1: 110, y0: 30, y1: 80 }; // red object on green ground

let server: ChildProcess;
let app: OperatorConsole;
let controller: SessionController;
const serverLog: string[] = [];

function scenePng(): Uint8Array {
  const png = new PNG({ width: WIDTH, height: HEIGHT });
  for (let y = 0; y < HEIGHT; y++) {
    for (let x = 0; x < WIDTH; x++) {
      const i = (y * WIDTH + x) * 4;
      const inBox = x >= BOX.x0 && x < BOX.x1 && y >= BOX.y0 && y < BOX.y1;
      png.data[i] = inBox ? 225 : 35;
      png.data[i + 1] = inBox ? 70 : 110;
      png.data[i + 2] = inBox ? 55 : 45;
      png.data[i + 3] = 255;
    }
  }
  return new Uint8Array(PNG.sync.write(png));
}

function decodeMask(bytes: Uint8Array): boolean[] {
  const png = PNG.sync.read(Buffer.from(bytes));
  const out: boolean[] = new Array(png.width * png.height);
  for (let p = 0; p < png.width * png.height; p++) out[p] = png.data[p * 4] > 0;
  return out;
}

/** Even-odd fill of outline loops over pixel centers (vertical crossings). */
function rasterize(loops: Outline, width: number, height: number): boolean[] {
  type Seg = { x: number; yLo: number; yHi: number };
  const segs: Seg[] = [];
  for (const loop of loops) {
    for (let i = 0; i < loop.length; i++) {
      const [x1, y1] = loop[i];
      const [x2, y2] = loop[(i + 1) % loop.length];
      if (x1 === x2) segs.push({ x: x1, yLo: Math.min(y1, y2), yHi: Math.max(y1, y2) });
    }
  }
  const out = new Array<boolean>(width * height).fill(false);
  for (let y = 0; y < height; y++) {
    const cy = y + 0.5;
    const row = segs.filter((s) => s.yLo <= cy && cy <= s.yHi);
    for (let x = 0; x < width; x++) {
      const cx = x + 0.5;
      let crossings = 0;
      for (const s of row) if (s.x > cx) crossings++;
      out[y * width + x] = crossings % 2 === 1;
    }
  }
  return out;
}

function canvasClick(x: number, y: number): void {
  // jsdom bounding rects are zero-sized; the console falls back to a 1:1
  // mapping, so client coordinates are image coordinates here
  app.canvas.dispatchEvent(
    new window.MouseEvent("click", { clientX: x, clientY: y, bubbles: true }),
  );
}

async function settled<T>(fn: () => T | null | undefined, what: string): Promise<T> {
  for (let i = 0; i < 200; i++) {
    const v = fn();
    if (v !== null && v !== undefined) return v;
    await new Promise((r) => setTimeout(r, 25));
  }
  throw new Error(`timed out waiting for ${what}`);
}

async function idle(): Promise<void> {
  // wait until the controller's request queue drained
  await (controller as unknown as { queue: Promise<unknown> })["queue"];
  await new Promise((r) => setTimeout(r, 10));
}

beforeAll(async () => {
  server = spawn("pats", ["serve", "--port", String(PORT)], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  server.stdout?.on("data", (d) => serverLog.push(String(d)));
  server.stderr?.on("data", (d) => serverLog.push(String(d)));
  for (let i = 0; ; i++) {
    try {
      const r = await fetch(`${BASE}/openapi.json`);
      if (r.ok) break;
    } catch {
      /* not up yet */
    }
    if (i > 120) throw new Error(`server never came up:\n${serverLog.join("")}`);
    await new Promise((r) => setTimeout(r, 500));
  }

  controller = new SessionController(new SelectionApi(BASE));
  app = new OperatorConsole(controller);
  document.body.appendChild(app.root);
}, 120_000);

afterAll(() => {
  server?.kill();
});

describe("operator console end to end", () => {
  it("uploads, selects, refines, and confirms a grasp point by pointer only", async () => {
    // upload through the file input
    const file = new File([scenePng()], "scene.png", { type: "image/png" });
    Object.defineProperty(app.fileInput, "files", { value: [file] });
    app.fileInput.dispatchEvent(new window.Event("change", { bubbles: true }));
    await settled(() => controller.state, "session");
    expect(controller.state!.width).toBe(WIDTH);
    expect(controller.state!.height).toBe(HEIGHT);

    // click the object: the active segment comes back outlined
    canvasClick(75, 55);
    await idle();
    const afterClick = controller.state!;
    expect(afterClick.activeNode).not.toBeNull();
    expect(afterClick.activeOutline.length).toBeGreaterThan(0);
    const boxPixels = afterClick.maskPixels;
    expect(boxPixels).toBeGreaterThan(2000);
    expect(boxPixels).toBeLessThan(5000);

    // the green outline's pixel set equals the served mask exactly
    const served = decodeMask(await controller.api.maskPng(afterClick.sessionId));
    const outlined = rasterize(afterClick.activeOutline, WIDTH, HEIGHT);
    expect(outlined.filter(Boolean).length).toBe(boxPixels);
    expect(outlined).toEqual(served);

    // grow to the whole scene, shrink back toward the click
    app.growButton.click();
    await idle();
    expect(controller.state!.maskPixels).toBe(WIDTH * HEIGHT);
    app.shrinkButton.click();
    await idle();
    expect(controller.state!.activeNode).toBe(afterClick.activeNode);
    expect(controller.state!.maskPixels).toBe(boxPixels);

    // grow again and subtract the object from the selection
    app.growButton.click();
    await idle();
    app.modeButtons.get("subtract")!.click();
    canvasClick(75, 55);
    await idle();
    expect(controller.state!.maskPixels).toBe(WIDTH * HEIGHT - boxPixels);

    // a grasp point on the subtracted object is rejected with a prompt
    app.modeButtons.get("grasp")!.click();
    canvasClick(75, 55);
    await idle().catch(() => undefined);
    await settled(
      () => (/choose another point/.test(controller.state!.lastStatus) ? true : null),
      "rejection prompt",
    );
    expect(controller.state!.graspPoint).toBeNull();

    // a grasp point inside the remaining mask is confirmed and displayed
    canvasClick(5, 5);
    await idle().catch(() => undefined);
    await settled(() => controller.state!.graspPoint, "grasp confirmation");
    expect(controller.state!.graspPoint).toEqual([5, 5]);
    expect(app.graspPanel.textContent).toContain("(5, 5)");

    // re-confirmation replaces the point
    canvasClick(8, 100);
    await idle().catch(() => undefined);
    await settled(
      () => (controller.state!.graspPoint?.[0] === 8 ? true : null),
      "grasp point replacement",
    );
    expect(controller.state!.graspPoint).toEqual([8, 100]);
  }, 120_000);

  it("never resegments locally: outlines always come from the last reply", async () => {
    // independent check via a recording fetch on a fresh session
    const replies: Array<{ outline?: Outline }> = [];
    const recording = async (url: string, init?: RequestInit) => {
      const res = await fetch(url, init);
      const clone = res.clone();
      try {
        replies.push((await clone.json()) as { outline?: Outline });
      } catch {
        /* binary body */
      }
      return res;
    };
    const ctl = new SessionController(new SelectionApi(BASE, recording));
    await ctl.open(scenePng());
    await ctl.clickAt(75, 55);
    const last = replies[replies.length - 1];
    expect(ctl.state!.activeOutline).toEqual(last.outline);
  });

  it("cleanly reports expired or unknown sessions", async () => {
    const ctl = new SessionController(new SelectionApi(BASE));
    await ctl.open(scenePng());
    ctl.state!.sessionId = "долой0000000000"; // unknown id
    await expect(ctl.grow()!).rejects.toThrow(/unknown or expired/);
  });
});
