import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function mockFetch(status: number, body: unknown): void {
  vi.stubGlobal(
    "fetch",
    vi.fn(async () => ({
      ok: status < 400,
      status,
      statusText: `status ${status}`,
      json: async () => body,
    })),
  );
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("strips trailing slashes from the base url", async () => {
    mockFetch(200, []);
    const client = new ApiClient("http://example.test:8000///");
    await client.listDatasets();
    expect(vi.mocked(fetch).mock.calls[0][0]).toBe("http://example.test:8000/datasets");
  });

  it("surfaces conflict responses as ApiError with the server detail", async () => {
    mockFetch(409, { detail: "step requires phase 'running'" });
    const client = new ApiClient("http://example.test");
    const error = await client.step("abc").catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(409);
    expect((error as ApiError).detail).toContain("running");
  });

  it("surfaces incomplete-batch rejections with the missing pairs", async () => {
    mockFetch(422, { detail: "missing answers for comparisons: [(3, 7)]" });
    const client = new ApiClient("http://example.test");
    const error = await client
      .submitVotes("abc", [{ new_location: 3, opponent: 5, preferred: 3 }])
      .catch((e: unknown) => e);
    expect((error as ApiError).status).toBe(422);
    expect((error as ApiError).message).toContain("(3, 7)");
  });

  it("posts vote bodies in the wire shape", async () => {
    mockFetch(200, { phase: "running", k: 2 });
    const client = new ApiClient("http://example.test");
    await client.submitVotes("abc", [{ new_location: 1, opponent: 2, preferred: 2 }]);
    const [, init] = vi.mocked(fetch).mock.calls[0];
    expect(init?.method).toBe("POST");
    expect(JSON.parse(String(init?.body))).toEqual({
      votes: [{ new_location: 1, opponent: 2, preferred: 2 }],
    });
  });
});
