/** Typed client for the service's JSON endpoints with error
 * classification: network failures, 4xx, and 5xx become distinct kinds
 * so the view can render each state differently. */

import type {
  DomainDetail,
  SampleKind,
  SamplePayload,
  SearchResponse,
} from "./types.js";

export type FetchLike = (url: string) => Promise<Response>;

export type ApiErrorKind = "network" | "client" | "server";

export class ApiError extends Error {
  readonly kind: ApiErrorKind;
  readonly status: number | null;

  constructor(kind: ApiErrorKind, status: number | null, message: string) {
    super(message);
    this.name = "ApiError";
    this.kind = kind;
    this.status = status;
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base: string, fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url) => fetch(url));
  }

  search(query: string, n: number): Promise<SearchResponse> {
    return this.get(`/search?q=${encodeURIComponent(query)}&n=${n}`);
  }

  domainDetail(code: string): Promise<DomainDetail> {
    return this.get(`/domains/${encodeURIComponent(code)}`);
  }

  samplePatents(
    code: string,
    kind: SampleKind,
    seed?: number,
  ): Promise<SamplePayload> {
    const seedPart = seed === undefined ? "" : `&seed=${seed}`;
    return this.get(
      `/domains/${encodeURIComponent(code)}/patents?kind=${kind}${seedPart}`,
    );
  }

  private async get<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path);
    } catch (err) {
      throw new ApiError("network", null, describeFailure(err));
    }
    if (!response.ok) {
      const kind: ApiErrorKind = response.status >= 500 ? "server" : "client";
      throw new ApiError(kind, response.status, await errorText(response));
    }
    return (await response.json()) as T;
  }
}

function describeFailure(err: unknown): string {
  const detail = err instanceof Error ? err.message : String(err);
  return `service unreachable: ${detail}`;
}

async function errorText(response: Response): Promise<string> {
  const fallback = `request failed with status ${response.status}`;
  try {
    const body: unknown = await response.json();
    if (
      typeof body === "object" &&
      body !== null &&
      typeof (body as { error?: unknown }).error === "string"
    ) {
      return (body as { error: string }).error;
    }
  } catch {
    // non-JSON error body; keep the status fallback
  }
  return fallback;
}
