/**
 * render.ts: DOM rendering for the summary panel, the result view,
 * and the session explorer lists.
 *
 * Numbers from the report are rendered verbatim via String(value);
 * nothing here recomputes rates, uplift, or intervals.
 */

import type {
  AssessmentReport,
  ConversionRule,
  GraphSummary,
  SessionSample,
} from './types.js';

const escapeHtml = (value: string): string =>
  value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');

/** True when an event's canonical text matches the conversion rule. */
export function matchesConversion(text: string, rule: ConversionRule): boolean {
  // sentinel texts ("session start"/"session end") are not JSON objects
  if (!text.startsWith('{')) return false;
  try {
    const parsed: unknown = JSON.parse(text);
    if (parsed === null || typeof parsed !== 'object' || Array.isArray(parsed)) return false;
    return (parsed as Record<string, unknown>)[rule.field] === rule.value;
  } catch {
    return false;
  }
}

export function renderGraphSummary(el: HTMLElement, summary: GraphSummary): void {
  const rows = summary.top_events
    .map(
      (event) => `
      <tr>
        <td class="event-text">${escapeHtml(event.text)}</td>
        <td class="visits">${String(event.visits)}</td>
      </tr>`,
    )
    .join('');
  el.innerHTML = `
    <h2>Observed behavior</h2>
    <p class="graph-stats">
      <span data-stat="nodes">${String(summary.nodes)}</span> events,
      <span data-stat="edges">${String(summary.edges)}</span> transitions,
      density <span data-stat="density">${String(summary.density)}</span>
    </p>
    <table class="top-events">
      <thead><tr><th>event</th><th>visits</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

export function renderReport(el: HTMLElement, report: AssessmentReport): void {
  const { rates, uplift, new_edges } = report;
  const quantiles = new_edges.weight_quantiles;
  el.innerHTML = `
    <h2>Result: ${escapeHtml(report.campaign.label)}</h2>
    <div class="cvr-compare">
      <div class="cvr-card">
        <span class="cvr-label">control CVR</span>
        <span class="cvr-value" data-field="control">${String(rates.control)}</span>
      </div>
      <div class="cvr-card">
        <span class="cvr-label">treatment CVR</span>
        <span class="cvr-value" data-field="treatment">${String(rates.treatment)}</span>
      </div>
      <div class="cvr-card ${uplift.estimate >= 0 ? 'up' : 'down'}">
        <span class="cvr-label">uplift</span>
        <span class="cvr-value" data-field="uplift">${String(uplift.estimate)}</span>
        <span class="ci-band" data-field="ci">
          [${String(uplift.ci_low)}, ${String(uplift.ci_high)}]
          at confidence ${String(uplift.confidence)}
        </span>
      </div>
    </div>
    <p class="new-edges" data-field="new-edges">
      predicted edges: ${String(new_edges.n_in)} incoming, ${String(new_edges.n_out)} outgoing${
        quantiles
          ? `; weights ${String(quantiles.min)} .. ${String(quantiles.max)} (median ${String(
              quantiles.median,
            )})`
          : ' (none accepted; both groups walk the observed graph)'
      }
    </p>
    <p class="run-config">
      ${String(report.config.n_sessions)} sessions per group,
      seed ${String(report.config.seed_control)},
      ${report.config.paired ? 'paired' : 'independent'} random streams
    </p>`;
}

export function renderSessions(
  el: HTMLElement,
  sessions: SessionSample[],
  rule: ConversionRule,
): void {
  if (sessions.length === 0) {
    el.innerHTML = `<p class="empty-state">no sessions to show</p>`;
    return;
  }
  const items = sessions
    .map((session) => {
      const texts = session.texts ?? session.node_ids;
      const hasText = session.texts !== undefined;
      let converted = false;
      const events = texts
        .map((text) => {
          const hit = hasText && matchesConversion(text, rule);
          converted = converted || hit;
          return `<li class="event${hit ? ' conversion' : ''}">${escapeHtml(text)}${
            hit ? '<span class="conversion-badge">conversion</span>' : ''
          }</li>`;
        })
        .join('');
      return `
      <li class="session${converted ? ' converted' : ''}" data-converting="${converted}">
        <details>
          <summary>
            #${String(session.index)} &middot; ${String(texts.length)} events &middot;
            ${escapeHtml(session.terminated_by)}
            ${converted ? '<span class="conversion-badge">conversion</span>' : ''}
          </summary>
          <ol class="events">${events}</ol>
        </details>
      </li>`;
    })
    .join('');
  el.innerHTML = `<ol class="session-list">${items}</ol>`;
}
