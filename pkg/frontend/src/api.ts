/**
 * HTTP client for the analytics service.
 *
 * One thin method per endpoint; every method returns the parsed response
 * document unchanged.  Service errors arrive as an {error: {type, message}}
 * envelope and are rethrown as ApiError so views can show the reason.
 */

import type {
  ConfigDoc,
  CoverageDoc,
  CpcDoc,
  EffectsDoc,
  EnsembleOverviewDoc,
  EnsemblePredictionsDoc,
  EnsembleSurfacesDoc,
  HpImportanceDoc,
  IndexDoc,
  IntermediateDoc,
  LeaderboardDoc,
  LocalSurrogateDoc,
  OverviewDoc,
  ReportDoc,
  RunsDoc,
  SamplingDoc,
  StructureGraphDoc,
  SurrogateDoc,
} from "./types";

export class ApiError extends Error {
  readonly status: number;
  readonly kind: string;

  constructor(status: number, kind: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.kind = kind;
  }
}

export function isAbort(error: unknown): boolean {
  return error instanceof DOMException
    ? error.name === "AbortError"
    : error instanceof Error && error.name === "AbortError";
}

export interface ExportResult {
  filename: string;
  mediaType: string;
  bytes: Uint8Array;
}

type Params = Record<string, string | number | null | undefined>;

function query(params: Params): string {
  const search = new URLSearchParams();
  for (const [name, value] of Object.entries(params)) {
    if (value === null || value === undefined) continue;
    search.set(name, String(value));
  }
  const text = search.toString();
  return text ? `?${text}` : "";
}

function seg(value: string): string {
  return encodeURIComponent(value);
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let kind = "error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { error?: { type?: string; message?: string } };
    if (body.error) {
      kind = body.error.type ?? kind;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, kind, message);
}

export class Client {
  private readonly base: string;

  constructor(base = "") {
    this.base = base.replace(/\/$/, "");
  }

  private async get<T>(path: string, params: Params = {}, signal?: AbortSignal): Promise<T> {
    const response = await fetch(this.base + path + query(params), { signal });
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  index(signal?: AbortSignal): Promise<IndexDoc> {
    return this.get("/", {}, signal);
  }

  runs(signal?: AbortSignal): Promise<RunsDoc> {
    return this.get("/runs", {}, signal);
  }

  overview(run: string, signal?: AbortSignal): Promise<OverviewDoc> {
    return this.get(`/runs/${seg(run)}/overview`, {}, signal);
  }

  leaderboard(run: string, signal?: AbortSignal): Promise<LeaderboardDoc> {
    return this.get(`/runs/${seg(run)}/leaderboard`, {}, signal);
  }

  report(run: string, candidate: string, signal?: AbortSignal): Promise<ReportDoc> {
    return this.get(`/runs/${seg(run)}/candidates/${seg(candidate)}/report`, {}, signal);
  }

  config(run: string, candidate: string, signal?: AbortSignal): Promise<ConfigDoc> {
    return this.get(`/runs/${seg(run)}/candidates/${seg(candidate)}/config`, {}, signal);
  }

  surrogate(
    run: string,
    candidate: string,
    maxLeafNodes?: number,
    signal?: AbortSignal,
  ): Promise<SurrogateDoc> {
    return this.get(
      `/runs/${seg(run)}/candidates/${seg(candidate)}/surrogate`,
      { max_leaf_nodes: maxLeafNodes },
      signal,
    );
  }

  localSurrogate(
    run: string,
    candidate: string,
    row?: number,
    signal?: AbortSignal,
  ): Promise<LocalSurrogateDoc> {
    return this.get(
      `/runs/${seg(run)}/candidates/${seg(candidate)}/local-surrogate`,
      { row },
      signal,
    );
  }

  effects(run: string, candidate: string, signal?: AbortSignal): Promise<EffectsDoc> {
    return this.get(`/runs/${seg(run)}/candidates/${seg(candidate)}/effects`, {}, signal);
  }

  intermediate(
    run: string,
    candidate: string,
    node: string,
    limit?: number,
    signal?: AbortSignal,
  ): Promise<IntermediateDoc> {
    return this.get(
      `/runs/${seg(run)}/candidates/${seg(candidate)}/intermediate/${seg(node)}`,
      { limit },
      signal,
    );
  }

  structureGraph(run: string, at?: number | null, signal?: AbortSignal): Promise<StructureGraphDoc> {
    return this.get(`/runs/${seg(run)}/structure-graph`, { at }, signal);
  }

  cpc(run: string, signal?: AbortSignal): Promise<CpcDoc> {
    return this.get(`/runs/${seg(run)}/cpc`, {}, signal);
  }

  sampling(run: string, hyperparameter: string, signal?: AbortSignal): Promise<SamplingDoc> {
    return this.get(`/runs/${seg(run)}/sampling/${seg(hyperparameter)}`, {}, signal);
  }

  coverage(run: string, at?: number | null, signal?: AbortSignal): Promise<CoverageDoc> {
    return this.get(`/runs/${seg(run)}/coverage`, { at }, signal);
  }

  hpImportance(run: string, structureOf?: string | null, signal?: AbortSignal): Promise<HpImportanceDoc> {
    return this.get(`/runs/${seg(run)}/hp-importance`, { structure_of: structureOf }, signal);
  }

  ensembleOverview(run: string, signal?: AbortSignal): Promise<EnsembleOverviewDoc> {
    return this.get(`/runs/${seg(run)}/ensemble/overview`, {}, signal);
  }

  ensemblePredictions(run: string, signal?: AbortSignal): Promise<EnsemblePredictionsDoc> {
    return this.get(`/runs/${seg(run)}/ensemble/predictions`, {}, signal);
  }

  ensembleSurfaces(run: string, signal?: AbortSignal): Promise<EnsembleSurfacesDoc> {
    return this.get(`/runs/${seg(run)}/ensemble/surfaces`, {}, signal);
  }

  async exportArtifact(
    run: string,
    artifact: string,
    params: Record<string, string | number | null>,
  ): Promise<ExportResult> {
    const body: Record<string, unknown> = {};
    for (const [name, value] of Object.entries(params)) {
      if (value !== null && value !== undefined) body[name] = value;
    }
    const response = await fetch(this.base + "/export", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ run_id: run, artifact, params: body }),
    });
    await raiseForStatus(response);
    const disposition = response.headers.get("Content-Disposition") ?? "";
    const match = /filename="?([^";]+)"?/.exec(disposition);
    return {
      filename: match?.[1] ?? `${artifact}.bin`,
      mediaType: response.headers.get("Content-Type") ?? "application/octet-stream",
      bytes: new Uint8Array(await response.arrayBuffer()),
    };
  }
}

/**
 * Keeps at most one request in flight per key.
 *
 * A card calls begin() with its own key before each fetch; whatever that
 * card still had running is aborted, so a stale response can never land
 * on top of a newer one.
 */
export class RequestLane {
  private readonly controllers = new Map<string, AbortController>();

  begin(key: string): AbortSignal {
    this.controllers.get(key)?.abort();
    const controller = new AbortController();
    this.controllers.set(key, controller);
    return controller.signal;
  }

  abortAll(): void {
    for (const controller of this.controllers.values()) controller.abort();
    this.controllers.clear();
  }
}
