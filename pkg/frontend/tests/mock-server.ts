/**
 * mock-server.ts: in-process stand-in for the clicksim service.
 *
 * Serves recorded fixtures over real HTTP so the client code under test
 * exercises its actual fetch/parse paths. Scenarios switch the assess
 * endpoint between success and the documented error responses; request
 * counts let tests assert single-flight behavior.
 */

import { createServer, type Server } from 'node:http';
import { readFileSync } from 'node:fs';
import { fileURLToPath, URL as NodeURL } from 'node:url';

const fixture = (name: string): string =>
  readFileSync(fileURLToPath(new NodeURL(`./fixtures/${name}`, import.meta.url)), 'utf8');

export const REPORT_BYTES = fixture('report.json');
export const GRAPH_SUMMARY_BYTES = fixture('graph-summary.json');

export interface FixtureSession {
  index: number;
  node_ids: string[];
  terminated_by: string;
  texts: string[];
}

export const SESSION_FIXTURE = JSON.parse(fixture('sessions.json')) as {
  control: FixtureSession[];
  treatment: FixtureSession[];
};

/** The request id the mock hands out and recognizes. */
export const REQUEST_ID = 'a1b2c3d4e5f60718';

export type Scenario = 'ok' | 'conflict' | 'unavailable' | 'invalid';

const ERROR_RESPONSES: Record<Exclude<Scenario, 'ok'>, { status: number; body: string }> = {
  conflict: {
    status: 409,
    body: JSON.stringify({
      error: { type: 'DuplicateNode', message: 'campaign event already present in the graph' },
    }),
  },
  unavailable: {
    status: 503,
    body: JSON.stringify({
      error: { type: 'NotLoaded', message: 'server started without graph and model artifacts' },
    }),
  },
  invalid: {
    status: 400,
    body: JSON.stringify({
      error: { type: 'ValueError', message: 'campaign descriptor must not be empty' },
    }),
  },
};

export class MockService {
  scenario: Scenario = 'ok';
  assessDelayMs = 0;
  /** When true the sample endpoint answers 404 as if the store evicted. */
  forgetReports = false;
  counts = { health: 0, summary: 0, assess: 0, sessions: 0 };
  lastAssessBody: unknown = null;
  baseUrl = '';
  private server: Server | null = null;

  async start(port = 0): Promise<string> {
    this.server = createServer((req, res) => this.handle(req, res));
    await new Promise<void>((resolve) =>
      this.server!.listen(port, '127.0.0.1', () => resolve()),
    );
    const address = this.server.address();
    if (address === null || typeof address === 'string') throw new Error('no port assigned');
    this.baseUrl = `http://127.0.0.1:${address.port}`;
    return this.baseUrl;
  }

  get port(): number {
    const address = this.server?.address();
    return address !== null && typeof address === 'object' && address !== undefined
      ? address.port
      : 0;
  }

  async stop(): Promise<void> {
    if (this.server === null) return;
    const server = this.server;
    this.server = null;
    await new Promise<void>((resolve, reject) =>
      server.close((err) => (err ? reject(err) : resolve())),
    );
  }

  private handle(req: import('node:http').IncomingMessage, res: import('node:http').ServerResponse): void {
    // mirror the real service's CORS posture for an allowed origin
    res.setHeader('Access-Control-Allow-Origin', '*');
    res.setHeader('Access-Control-Expose-Headers', 'X-Request-Id');
    if (req.method === 'OPTIONS') {
      res.writeHead(204, {
        'Access-Control-Allow-Methods': 'GET, POST, OPTIONS',
        'Access-Control-Allow-Headers': 'content-type',
      });
      res.end();
      return;
    }
    const url = new NodeURL(req.url ?? '/', this.baseUrl);
    if (req.method === 'GET' && url.pathname === '/healthz') {
      this.counts.health += 1;
      this.json(res, 200, {
        status: 'ok',
        version: '0.1.0',
        artifacts: { graph: 'deadbeef00000001', model: 'deadbeef00000002', embedding: 'deadbeef00000003' },
      });
      return;
    }
    if (req.method === 'GET' && url.pathname === '/api/graph/summary') {
      this.counts.summary += 1;
      this.raw(res, 200, GRAPH_SUMMARY_BYTES, 'application/json');
      return;
    }
    if (req.method === 'POST' && url.pathname === '/api/assess') {
      this.counts.assess += 1;
      let body = '';
      req.on('data', (chunk) => (body += chunk));
      req.on('end', () => {
        this.lastAssessBody = body.length > 0 ? JSON.parse(body) : null;
        setTimeout(() => {
          if (this.scenario === 'ok') {
            res.writeHead(200, {
              'content-type': 'application/json',
              'X-Request-Id': REQUEST_ID,
            });
            res.end(REPORT_BYTES);
          } else {
            const { status, body: errorBody } = ERROR_RESPONSES[this.scenario];
            this.raw(res, status, errorBody, 'application/json');
          }
        }, this.assessDelayMs);
      });
      return;
    }
    if (req.method === 'GET' && url.pathname === '/api/sessions/sample') {
      this.counts.sessions += 1;
      const requestId = url.searchParams.get('request_id');
      const group = url.searchParams.get('group');
      const limitParam = url.searchParams.get('limit');
      if (requestId !== REQUEST_ID || this.forgetReports) {
        this.json(res, 404, {
          error: { type: 'UnknownRequestId', message: `no stored report for '${requestId}'` },
        });
        return;
      }
      if (group !== 'control' && group !== 'treatment') {
        this.json(res, 400, {
          error: { type: 'InvalidGroup', message: "group must be 'control' or 'treatment'" },
        });
        return;
      }
      let rows = SESSION_FIXTURE[group];
      if (limitParam !== null) {
        const limit = Number(limitParam);
        if (!Number.isInteger(limit) || limit < 0) {
          this.json(res, 400, {
            error: { type: 'InvalidLimit', message: 'limit must be non-negative' },
          });
          return;
        }
        rows = rows.slice(0, limit);
      }
      const ndjson = rows.map((row) => JSON.stringify(row) + '\n').join('');
      this.raw(res, 200, ndjson, 'application/x-ndjson');
      return;
    }
    this.json(res, 404, { error: { type: 'NotFound', message: url.pathname } });
  }

  private json(res: import('node:http').ServerResponse, status: number, body: unknown): void {
    this.raw(res, status, JSON.stringify(body), 'application/json');
  }

  private raw(
    res: import('node:http').ServerResponse,
    status: number,
    body: string,
    contentType: string,
  ): void {
    res.writeHead(status, { 'content-type': contentType });
    res.end(body);
  }
}
