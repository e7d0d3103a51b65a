/**
 * app.ts: page controller.
 *
 * Wires the form, the service client, the result view, and the session
 * explorer together. One assessment runs at a time: the run button is
 * disabled while a request is in flight and a second submit is a no-op
 * until the first settles.
 */

import { ApiClient, ApiError, NetworkError } from './api.js';
import { CampaignForm } from './form.js';
import { renderGraphSummary, renderReport, renderSessions } from './render.js';
import type { AssessRequest, ConversionRule, Group } from './types.js';

export interface AppConfig {
  /** Service root, e.g. "http://127.0.0.1:8000"; "" means same-origin. */
  baseUrl: string;
}

const GROUPS: Group[] = ['control', 'treatment'];

export class App {
  readonly root: HTMLElement;
  readonly api: ApiClient;
  readonly form: CampaignForm;
  private inFlight = false;
  private lastRequest: AssessRequest | null = null;
  private requestId: string | null = null;
  private conversion: ConversionRule | null = null;
  private ops: Promise<void> = Promise.resolve();

  constructor(root: HTMLElement, config: AppConfig) {
    this.root = root;
    this.api = new ApiClient(config.baseUrl);
    const doc = root.ownerDocument;

    root.innerHTML = `
      <header class="masthead"><h1>clicksim</h1>
        <p class="tagline">what-if campaign assessment</p></header>
      <section class="summary-panel"><h2>Observed behavior</h2>
        <p class="muted">loading graph summary&hellip;</p></section>
      <section class="campaign-panel"></section>
      <p class="status" role="status" hidden></p>
      <div class="banner" role="alert" hidden></div>
      <section class="result-panel" hidden></section>
      <section class="explorer" hidden>
        <h2>Sampled sessions</h2>
        <div class="panes">
          ${GROUPS.map(
            (group) => `
          <div class="pane" data-group="${group}">
            <h3>${group}</h3>
            <label class="field"><span>limit</span>
              <input class="limit" type="number" value="20" min="0" step="1" /></label>
            <button type="button" class="load">reload</button>
            <div class="sessions"></div>
          </div>`,
          ).join('')}
        </div>
      </section>`;

    this.form = new CampaignForm(doc);
    root.querySelector('.campaign-panel')!.appendChild(this.form.element);
    this.form.onSubmit = (request) => this.run(request);

    for (const group of GROUPS) {
      this.pane(group)
        .querySelector<HTMLButtonElement>('.load')!
        .addEventListener('click', () => this.track(this.loadPane(group)));
    }

    this.track(this.loadSummary());
  }

  /** Settles when every operation started so far has finished. */
  flush(): Promise<void> {
    return this.ops;
  }

  private track(op: Promise<void>): void {
    this.ops = this.ops.then(() => op).catch(() => {});
  }

  private pane(group: Group): HTMLElement {
    return this.root.querySelector<HTMLElement>(`.pane[data-group="${group}"]`)!;
  }

  private status(text: string | null): void {
    const el = this.root.querySelector<HTMLElement>('.status')!;
    el.hidden = text === null;
    el.textContent = text ?? '';
    el.classList.toggle('running', text !== null);
  }

  private banner(kind: string | null, message = '', retry = false): void {
    const el = this.root.querySelector<HTMLElement>('.banner')!;
    if (kind === null) {
      el.hidden = true;
      el.textContent = '';
      delete el.dataset['kind'];
      return;
    }
    el.hidden = false;
    el.dataset['kind'] = kind;
    el.textContent = message;
    if (retry) {
      const button = this.root.ownerDocument.createElement('button');
      button.type = 'button';
      button.className = 'retry';
      button.textContent = 'retry';
      button.addEventListener('click', () => {
        if (this.lastRequest) this.run(this.lastRequest);
      });
      el.append(' ', button);
    }
  }

  private async loadSummary(): Promise<void> {
    const panel = this.root.querySelector<HTMLElement>('.summary-panel')!;
    try {
      renderGraphSummary(panel, await this.api.graphSummary());
    } catch {
      panel.innerHTML = `<h2>Observed behavior</h2>
        <p class="muted">graph summary unavailable</p>`;
    }
  }

  /** Submit one assessment; no-op while another is in flight. */
  run(request: AssessRequest): void {
    if (this.inFlight) return;
    this.inFlight = true;
    this.lastRequest = request;
    this.form.setBusy(true);
    this.banner(null);
    this.status('running simulation…');
    this.track(this.finishRun(request));
  }

  private async finishRun(request: AssessRequest): Promise<void> {
    const resultPanel = this.root.querySelector<HTMLElement>('.result-panel')!;
    try {
      const { report, requestId } = await this.api.assess(request);
      this.requestId = requestId;
      this.conversion = report.config.conversion;
      renderReport(resultPanel, report);
      resultPanel.hidden = false;
      this.root.querySelector<HTMLElement>('.explorer')!.hidden = false;
      await Promise.all(GROUPS.map((group) => this.loadPane(group)));
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.banner('conflict', 'campaign already exists as an event');
      } else if (error instanceof ApiError && error.status === 503) {
        this.banner('unavailable', `service unavailable, try again shortly (${error.message})`);
      } else if (error instanceof ApiError) {
        this.banner('rejected', `request rejected: ${error.message}`);
      } else if (error instanceof NetworkError) {
        this.banner('network', 'could not reach the service.', true);
      } else {
        throw error;
      }
    } finally {
      this.status(null);
      this.inFlight = false;
      this.form.setBusy(false);
    }
  }

  private async loadPane(group: Group): Promise<void> {
    if (this.requestId === null || this.conversion === null) return;
    const pane = this.pane(group);
    const target = pane.querySelector<HTMLElement>('.sessions')!;
    const limit = Number(pane.querySelector<HTMLInputElement>('.limit')!.value);
    try {
      const sessions = await this.api.sampleSessions(
        this.requestId,
        group,
        Number.isInteger(limit) && limit >= 0 ? limit : undefined,
      );
      renderSessions(target, sessions, this.conversion);
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        target.innerHTML = `<p class="stale">samples expired, run the assessment again</p>`;
      } else {
        const message = error instanceof Error ? error.message : String(error);
        target.innerHTML = `<p class="pane-error"></p>`;
        target.querySelector('.pane-error')!.textContent = `could not load sessions: ${message}`;
      }
    }
  }
}

export function initApp(root: HTMLElement, config: AppConfig): App {
  return new App(root, config);
}
