/**
 * form.ts: campaign entry form.
 *
 * Collects the hypothetical event (actionType, campaignTitle, optional
 * extra descriptor fields), the audience segment, and the simulation
 * knobs. The run button stays disabled until the form serializes to a
 * valid request.
 */

import type { AssessRequest } from './types.js';

export const SEGMENT_OPTIONS: Record<string, string[]> = {
  country: ['United States', 'India', 'United Kingdom', 'Canada', 'Germany'],
  browser: ['Chrome', 'Safari', 'Firefox', 'Edge'],
  source: ['google', '(direct)', 'youtube.com', 'Partners'],
};

const escapeHtml = (value: string): string =>
  value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');

const segmentSelect = (field: string, options: string[]): string => `
  <label class="field">
    <span>${escapeHtml(field)}</span>
    <select data-segment="${escapeHtml(field)}">
      ${options.map((o) => `<option>${escapeHtml(o)}</option>`).join('')}
    </select>
  </label>`;

export class CampaignForm {
  readonly element: HTMLFormElement;
  private onRun: (request: AssessRequest) => void = () => {};

  constructor(doc: Document) {
    this.element = doc.createElement('form');
    this.element.className = 'campaign-form';
    this.element.noValidate = true;
    this.element.innerHTML = `
      <h2>Campaign</h2>
      <label class="field">
        <span>action type</span>
        <input name="actionType" type="text" placeholder="Clicked spring campaign banner" />
      </label>
      <label class="field">
        <span>campaign title</span>
        <input name="campaignTitle" type="text" placeholder="spring-campaign" />
      </label>
      <fieldset class="extra-fields">
        <legend>extra event fields</legend>
        <div class="rows"></div>
        <button type="button" class="add-row">add field</button>
      </fieldset>
      <fieldset class="segment">
        <legend>segment</legend>
        ${Object.entries(SEGMENT_OPTIONS)
          .map(([field, options]) => segmentSelect(field, options))
          .join('')}
      </fieldset>
      <fieldset class="sim">
        <legend>simulation</legend>
        <label class="field"><span>sessions per group</span>
          <input name="n_sessions" type="number" value="2000" min="1" step="1" /></label>
        <label class="field"><span>seed</span>
          <input name="seed" type="number" value="0" min="0" step="1" /></label>
      </fieldset>
      <p class="form-error" hidden></p>
      <button type="submit" class="run" disabled>Run simulation</button>
    `;

    this.element.querySelector<HTMLButtonElement>('.add-row')!.addEventListener('click', () => {
      this.addRow();
      this.refresh();
    });
    this.element.addEventListener('input', () => this.refresh());
    this.element.addEventListener('submit', (event) => {
      event.preventDefault();
      const request = this.value();
      if (request) this.onRun(request);
    });
  }

  set onSubmit(handler: (request: AssessRequest) => void) {
    this.onRun = handler;
  }

  get runButton(): HTMLButtonElement {
    return this.element.querySelector<HTMLButtonElement>('button.run')!;
  }

  addRow(key = '', value = ''): void {
    const row = this.element.ownerDocument.createElement('div');
    row.className = 'extra-row';
    row.innerHTML = `
      <input class="row-key" type="text" placeholder="field" />
      <input class="row-value" type="text" placeholder="value" />
      <button type="button" class="remove-row" aria-label="remove field">x</button>
    `;
    row.querySelector<HTMLInputElement>('.row-key')!.value = key;
    row.querySelector<HTMLInputElement>('.row-value')!.value = value;
    row.querySelector<HTMLButtonElement>('.remove-row')!.addEventListener('click', () => {
      row.remove();
      this.refresh();
    });
    this.element.querySelector('.rows')!.appendChild(row);
  }

  private input(name: string): HTMLInputElement {
    return this.element.querySelector<HTMLInputElement>(`input[name="${name}"]`)!;
  }

  private intField(name: string, minimum: number): number | string {
    const raw = this.input(name).value.trim();
    const parsed = Number(raw);
    if (raw === '' || !Number.isInteger(parsed) || parsed < minimum) {
      return `${name} must be an integer >= ${minimum}`;
    }
    return parsed;
  }

  /** Problems preventing submission, or [] when the form is valid. */
  problems(): string[] {
    const issues: string[] = [];
    if (this.input('actionType').value.trim() === '') issues.push('action type is required');
    if (this.input('campaignTitle').value.trim() === '') issues.push('campaign title is required');
    for (const name of ['n_sessions', 'seed']) {
      const parsed = this.intField(name, name === 'seed' ? 0 : 1);
      if (typeof parsed === 'string') issues.push(parsed);
    }
    return issues;
  }

  /** The serialized request, or null while the form is invalid. */
  value(): AssessRequest | null {
    if (this.problems().length > 0) return null;
    const actionType = this.input('actionType').value.trim();
    const campaignTitle = this.input('campaignTitle').value.trim();
    const descriptor: Record<string, string> = { actionType, campaignTitle };
    for (const row of this.element.querySelectorAll('.extra-row')) {
      const key = row.querySelector<HTMLInputElement>('.row-key')!.value.trim();
      const value = row.querySelector<HTMLInputElement>('.row-value')!.value;
      if (key !== '') descriptor[key] = value;
    }
    const segment: Record<string, string> = {};
    for (const select of this.element.querySelectorAll<HTMLSelectElement>('select[data-segment]')) {
      segment[select.dataset['segment']!] = select.value;
    }
    return {
      campaign: { descriptor, segment, label: campaignTitle },
      n_sessions: this.intField('n_sessions', 1) as number,
      seed: this.intField('seed', 0) as number,
    };
  }

  /** Re-evaluate validity: gate the run button, surface inline errors. */
  refresh(): void {
    const issues = this.problems();
    const error = this.element.querySelector<HTMLParagraphElement>('.form-error')!;
    // only numeric problems are shown inline; empty required fields just gate the button
    const numeric = issues.filter((issue) => issue.includes('integer'));
    error.hidden = numeric.length === 0;
    error.textContent = numeric.join('; ');
    this.runButton.disabled = issues.length > 0 || this.busy;
  }

  private busy = false;

  /** Disable the run button while a request is in flight. */
  setBusy(busy: boolean): void {
    this.busy = busy;
    this.refresh();
  }
}
