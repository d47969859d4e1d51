/**
 * Thin client for the engine's HTTP API.
 *
 * Responses are parsed with the lexeme-preserving parser so number
 * spellings survive to the screen. Engine errors carry the server's
 * `detail` string verbatim; callers show it without rewording.
 */

import { asArr, asObj, JObj, Json, parseJson } from "./jsontext.js";

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

function extractDetail(body: string): string {
  try {
    const parsed = JSON.parse(body);
    if (parsed && typeof parsed.detail === "string") return parsed.detail;
  } catch {
    // not JSON; fall through to the raw body
  }
  return body || "request failed";
}

export class ApiClient {
  constructor(
    readonly base: string = "",
    private readonly fetchFn: FetchFn = (url, init) => fetch(url, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<string> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    const text = await res.text();
    if (!res.ok) throw new ApiError(res.status, extractDetail(text));
    return text;
  }

  private async json(method: string, path: string, body?: unknown): Promise<Json> {
    return parseJson(await this.request(method, path, body));
  }

  async pack(): Promise<JObj> {
    return asObj(await this.json("GET", "/api/pack"), "pack");
  }

  async conversations(): Promise<Json[]> {
    return asArr(await this.json("GET", "/api/conversations"), "conversations");
  }

  async createConversation(seed: string | null = null): Promise<JObj> {
    return asObj(await this.json("POST", "/api/conversations", { seed }), "conversation");
  }

  async deleteConversation(convId: string): Promise<void> {
    await this.request("DELETE", `/api/conversations/${encodeURIComponent(convId)}`);
  }

  /** Returns both the parsed record and the raw response text. */
  async postTurn(convId: string, text: string): Promise<{ doc: JObj; raw: string }> {
    const raw = await this.request(
      "POST",
      `/api/conversations/${encodeURIComponent(convId)}/turns`,
      { text },
    );
    return { doc: asObj(parseJson(raw), "turn record"), raw };
  }

  async wm(convId: string): Promise<{ doc: JObj; raw: string }> {
    const raw = await this.request("GET", `/api/conversations/${encodeURIComponent(convId)}/wm`);
    return { doc: asObj(parseJson(raw), "wm snapshot"), raw };
  }

  async candidates(convId: string): Promise<Json[]> {
    return asArr(
      await this.json("GET", `/api/conversations/${encodeURIComponent(convId)}/candidates`),
      "candidates",
    );
  }

  async records(convId: string): Promise<{ docs: Json[]; raw: string }> {
    const raw = await this.request(
      "GET",
      `/api/conversations/${encodeURIComponent(convId)}/records`,
    );
    return { docs: asArr(parseJson(raw), "records"), raw };
  }
}
