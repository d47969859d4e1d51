import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, FetchFn } from "../src/api.js";
import { field, JObj } from "../src/jsontext.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function stubFetch(
  responder: (url: string, init?: RequestInit) => { status: number; body: string },
): { fetchFn: FetchFn; calls: Call[] } {
  const calls: Call[] = [];
  const fetchFn: FetchFn = (url, init) => {
    calls.push({ url, init });
    const { status, body } = responder(url, init);
    return Promise.resolve(new Response(body, { status }));
  };
  return { fetchFn, calls };
}

describe("ApiClient", () => {
  it("hits the expected paths and encodes ids", async () => {
    const { fetchFn, calls } = stubFetch(() => ({ status: 200, body: "{}" }));
    const api = new ApiClient("", fetchFn);
    await api.pack();
    await api.wm("odd id/2");
    expect(calls[0].url).toBe("/api/pack");
    expect(calls[1].url).toBe("/api/conversations/odd%20id%2F2/wm");
  });

  it("posts turn text as json", async () => {
    const { fetchFn, calls } = stubFetch(() => ({
      status: 200,
      body: '{"turn": 1, "response": "ok"}',
    }));
    const api = new ApiClient("", fetchFn);
    const { doc } = await api.postTurn("conv_1", "hello there");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ text: "hello there" });
    expect(field.str(doc, "response")).toBe("ok");
  });

  it("returns the raw body alongside the parsed doc", async () => {
    const raw = '{"score": 1e-05}';
    const { fetchFn } = stubFetch(() => ({ status: 200, body: raw }));
    const api = new ApiClient("", fetchFn);
    const result = await api.postTurn("c", "x");
    expect(result.raw).toBe(raw);
    expect(field.num(result.doc, "score").text).toBe("1e-05");
  });

  it("carries the server's detail string verbatim on errors", async () => {
    const { fetchFn } = stubFetch(() => ({
      status: 404,
      body: '{"detail": "no conversation \'conv_9\'"}',
    }));
    const api = new ApiClient("", fetchFn);
    const err = await api.wm("conv_9").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
    expect((err as ApiError).detail).toBe("no conversation 'conv_9'");
  });

  it("falls back to the raw body when the error is not json", async () => {
    const { fetchFn } = stubFetch(() => ({ status: 500, body: "boom" }));
    const api = new ApiClient("", fetchFn);
    const err = await api.pack().catch((e: unknown) => e);
    expect((err as ApiError).detail).toBe("boom");
  });

  it("sends the seed on conversation create", async () => {
    const { fetchFn, calls } = stubFetch(() => ({
      status: 201,
      body: '{"id": "conv_1", "seed": "action_fan"}',
    }));
    const api = new ApiClient("", fetchFn);
    const created: JObj = await api.createConversation("action_fan");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ seed: "action_fan" });
    expect(field.str(created, "id")).toBe("conv_1");
  });

  it("prefixes a non-empty base", async () => {
    const { fetchFn, calls } = stubFetch(() => ({ status: 200, body: "[]" }));
    const api = new ApiClient("http://localhost:9999", fetchFn);
    await api.conversations();
    expect(calls[0].url).toBe("http://localhost:9999/api/conversations");
  });
});
