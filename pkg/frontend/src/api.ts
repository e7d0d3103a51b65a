/**
 * api.ts: thin typed client for the clicksim service.
 *
 * The base URL is the only configuration. Non-2xx responses become
 * ApiError carrying the server's structured {error: {type, message}}
 * body so the caller can branch on status and type.
 */

import type {
  AssessRequest,
  AssessmentReport,
  ErrorBody,
  Group,
  GraphSummary,
  HealthStatus,
  SessionSample,
} from './types.js';

export class ApiError extends Error {
  readonly status: number;
  readonly type: string;

  constructor(status: number, type: string, message: string) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
    this.type = type;
  }
}

/** Raised when the request never reached the server. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(cause instanceof Error ? cause.message : String(cause));
    this.name = 'NetworkError';
  }
}

async function toApiError(res: Response): Promise<ApiError> {
  let type = 'HttpError';
  let message = `${res.status} ${res.statusText}`;
  try {
    const body = (await res.json()) as ErrorBody;
    if (body && body.error && typeof body.error.type === 'string') {
      type = body.error.type;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(res.status, type, message);
}

export interface AssessResult {
  report: AssessmentReport;
  requestId: string;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  private async send(path: string, init?: RequestInit): Promise<Response> {
    let res: Response;
    try {
      res = await fetch(this.url(path), init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!res.ok) throw await toApiError(res);
    return res;
  }

  async health(): Promise<HealthStatus> {
    const res = await this.send('/healthz');
    return (await res.json()) as HealthStatus;
  }

  async graphSummary(): Promise<GraphSummary> {
    const res = await this.send('/api/graph/summary');
    return (await res.json()) as GraphSummary;
  }

  async assess(request: AssessRequest): Promise<AssessResult> {
    const res = await this.send('/api/assess', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(request),
    });
    const report = (await res.json()) as AssessmentReport;
    return { report, requestId: res.headers.get('X-Request-Id') ?? '' };
  }

  async sampleSessions(
    requestId: string,
    group: Group,
    limit?: number,
  ): Promise<SessionSample[]> {
    const params = new URLSearchParams({ request_id: requestId, group });
    if (limit !== undefined) params.set('limit', String(limit));
    const res = await this.send(`/api/sessions/sample?${params}`);
    const text = await res.text();
    return text
      .split('\n')
      .filter((line) => line.length > 0)
      .map((line) => JSON.parse(line) as SessionSample);
  }
}
