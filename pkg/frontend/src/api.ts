// Thin typed client for the documented /api/v1 endpoints.

import type {
  FieldError,
  GenerateRequest,
  GenerateResponse,
  StudyDoc,
  TrialRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly details: FieldError[] = [],
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<globalThis.Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(
        response.status,
        typeof body.error === "string" ? body.error : `HTTP ${response.status}`,
        Array.isArray(body.details) ? body.details : [],
      );
    }
    return body as T;
  }

  generate(request: GenerateRequest): Promise<GenerateResponse> {
    return this.request("/api/v1/generate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
  }

  fetchStudy(id: string): Promise<StudyDoc> {
    return this.request(`/api/v1/study/${encodeURIComponent(id)}`);
  }

  async submitTrials(session: string, records: TrialRecord[]): Promise<number> {
    const body = await this.request<{ stored: number }>("/api/v1/trials", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session, records }),
    });
    return body.stored;
  }
}
