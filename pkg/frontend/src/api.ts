/** Typed client for the selection service wire API.
 *
 * The client never interprets image content; segmentation lives entirely on
 * the server and every displayed outline comes back from it verbatim.
 */

export type Point = [number, number];
export type Outline = Point[][];

export interface SessionInfo {
  session_id: string;
  width: number;
  height: number;
}

export interface OpReply {
  node_id: number | null;
  active_node: number | null;
  noop: boolean;
  reason: string;
  outline: Outline;
  mask_outline: Outline;
  mask_pixels: number;
}

export interface GraspReply {
  session_id: string;
  point: { x: number; y: number };
  mask_pixels: number;
  width: number;
  height: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Minimal multipart/form-data encoder, so uploads do not depend on a
 * host-specific FormData implementation. */
export function encodeMultipart(
  field: string,
  filename: string,
  data: Uint8Array,
): { body: Uint8Array; contentType: string } {
  const boundary = "pats" + Math.random().toString(36).slice(2) + Date.now().toString(36);
  const head =
    `--${boundary}\r\n` +
    `Content-Disposition: form-data; name="${field}"; filename="${filename}"\r\n` +
    `Content-Type: application/octet-stream\r\n\r\n`;
  const tail = `\r\n--${boundary}--\r\n`;
  const headBytes = new TextEncoder().encode(head);
  const tailBytes = new TextEncoder().encode(tail);
  const body = new Uint8Array(headBytes.length + data.length + tailBytes.length);
  body.set(headBytes, 0);
  body.set(data, headBytes.length);
  body.set(tailBytes, headBytes.length + data.length);
  return { body, contentType: `multipart/form-data; boundary=${boundary}` };
}

export class SelectionApi {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => globalThis.fetch(...args),
  ) {}

  private async parse<T>(response: Response): Promise<T> {
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async openSession(imageBytes: Uint8Array, filename = "scene.png"): Promise<SessionInfo> {
    const { body, contentType } = encodeMultipart("image", filename, imageBytes);
    const response = await this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": contentType },
      // typed as BodyInit in lib.dom; newer TS models Uint8Array generically
      body: body as unknown as BodyInit,
    });
    return this.parse<SessionInfo>(response);
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: payload === undefined ? {} : { "Content-Type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    }).then((r) => this.parse<T>(r));
  }

  click(sid: string, x: number, y: number): Promise<OpReply> {
    return this.post(`/sessions/${sid}/click`, { x, y });
  }

  grow(sid: string): Promise<OpReply> {
    return this.post(`/sessions/${sid}/grow`);
  }

  shrink(sid: string, x: number, y: number): Promise<OpReply> {
    return this.post(`/sessions/${sid}/shrink`, { x, y });
  }

  add(sid: string, x: number, y: number): Promise<OpReply> {
    return this.post(`/sessions/${sid}/add`, { x, y });
  }

  subtract(sid: string, x: number, y: number): Promise<OpReply> {
    return this.post(`/sessions/${sid}/subtract`, { x, y });
  }

  reset(sid: string): Promise<OpReply> {
    return this.post(`/sessions/${sid}/reset`);
  }

  deleteSelection(sid: string): Promise<OpReply> {
    return this.post(`/sessions/${sid}/delete`);
  }

  confirmGraspPoint(sid: string, x: number, y: number): Promise<GraspReply> {
    return this.post(`/sessions/${sid}/grasp-point`, { x, y });
  }

  saliencyUrl(sid: string): string {
    return `${this.baseUrl}/sessions/${sid}/saliency.png`;
  }

  async maskPng(sid: string): Promise<Uint8Array> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sid}/mask.png`);
    if (!response.ok) throw new ApiError(response.status, `mask fetch failed`);
    return new Uint8Array(await response.arrayBuffer());
  }
}
