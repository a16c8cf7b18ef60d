import { describe, expect, it } from "vitest";

import { ServiceClient, ServiceError } from "../src/api.js";
import { serviceFetchStub } from "./fixtures.js";

describe("ServiceClient", () => {
  it("posts recommend with top_n merged into the body", async () => {
    const stub = serviceFetchStub();
    const client = new ServiceClient("", stub.impl);
    const got = await client.recommend(
      { latex: "a+b", context: "ctx", keywords: ["k"], topics: [] }, 7);
    expect(got.request_id).toBe("req-123");
    const call = stub.calls[0];
    expect(call.url).toBe("/recommend");
    expect(call.body).toMatchObject({ latex: "a+b", top_n: 7 });
  });

  it("encodes subgraph query parameters", async () => {
    const stub = serviceFetchStub();
    const client = new ServiceClient("http://svc", stub.impl);
    await client.subgraph("f3", 3);
    expect(stub.calls[0].url).toBe("http://svc/fem/subgraph?formula=f3&depth=3");
  });

  it("sends one judgment post per call", async () => {
    const stub = serviceFetchStub();
    const client = new ServiceClient("", stub.impl);
    await client.judge("req-123", "oer1", "Good");
    expect(stub.judgments).toEqual([
      { request_id: "req-123", oer_id: "oer1", rating: "Good" },
    ]);
  });

  it("surfaces the service detail message on errors", async () => {
    const stub = serviceFetchStub();
    const client = new ServiceClient("", stub.impl);
    await expect(client.judge("stale", "oer1", "OK")).rejects.toThrowError(
      /unknown request 'stale'/);
    await expect(client.judge("stale", "oer1", "OK")).rejects.toBeInstanceOf(
      ServiceError);
  });
});
