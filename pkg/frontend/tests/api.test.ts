import { describe, expect, it } from "vitest";

import { ApiError, Client, RequestLane, isAbort } from "../src/api";
import { apiBase } from "./helpers";

describe("client", () => {
  const client = new Client(apiBase());

  it("lists runs and fetches documents", async () => {
    const runs = await client.runs();
    const ids = runs.runs.map((r) => r.run_id);
    expect(ids).toContain("golden");
    expect(ids).toContain("empty");

    const overview = await client.overview("golden");
    expect(overview.run.run_id).toBe("golden");
    expect(overview.n_candidates).toBe(12);
    expect(overview.timeline.length).toBe(12);

    const index = await client.index();
    expect(index.artifacts).toContain("surrogate-tree");
  });

  it("raises typed errors from the error envelope", async () => {
    const error = await client.overview("ghost").then(
      () => null,
      (e: unknown) => e,
    );
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(404);
    expect((error as ApiError).kind).toBe("not-found");
    expect((error as ApiError).message).toContain("ghost");
  });

  it("parses export responses with their filename", async () => {
    const result = await client.exportArtifact("golden", "config", {
      candidate_id: "c001",
    });
    expect(result.filename).toBe("config-c001.json");
    expect(result.mediaType).toContain("application/json");
    const body = JSON.parse(new TextDecoder().decode(result.bytes)) as Record<string, unknown>;
    const direct = await client.config("golden", "c001");
    expect(body).toEqual(direct.config);
  });

  it("aborts the previous request in the same lane", async () => {
    const lane = new RequestLane();
    const first = client.overview("golden", lane.begin("slot"));
    const second = client.overview("golden", lane.begin("slot"));
    const firstOutcome = await first.then(
      () => "resolved",
      (e: unknown) => (isAbort(e) ? "aborted" : "failed"),
    );
    expect(firstOutcome).toBe("aborted");
    await expect(second).resolves.toMatchObject({ run: { run_id: "golden" } });
  });
});
