/**
 * types.ts: wire types for the clicksim HTTP API.
 *
 * These mirror the JSON documents the service returns; the UI renders
 * them as-is and never recomputes derived figures client-side.
 */

export interface CampaignDoc {
  descriptor: Record<string, string>;
  segment: Record<string, string>;
  label: string;
}

export interface AssessRequest {
  campaign: CampaignDoc;
  n_sessions?: number;
  seed?: number;
  max_length?: number;
  paired?: boolean;
  samples?: number;
}

export interface ConversionRule {
  field: string;
  value: string;
}

export interface SessionSample {
  index: number;
  node_ids: string[];
  terminated_by: 'reached_end' | 'max_length';
  texts?: string[];
}

export interface AssessmentReport {
  format: string;
  version: number;
  campaign: CampaignDoc & { node_id: string };
  config: {
    n_sessions: number;
    max_length: number;
    seed_control: number;
    seed_treatment: number;
    paired: boolean;
    conversion: ConversionRule;
  };
  rates: { control: number; treatment: number };
  uplift: {
    estimate: number;
    ci_low: number;
    ci_high: number;
    confidence: number;
  };
  new_edges: {
    n_in: number;
    n_out: number;
    weight_quantiles: {
      min: number;
      q25: number;
      median: number;
      q75: number;
      max: number;
    } | null;
  };
  samples: { control: SessionSample[]; treatment: SessionSample[] };
}

export interface GraphSummary {
  nodes: number;
  edges: number;
  density: number;
  top_events: { id: string; text: string; visits: number }[];
}

export interface HealthStatus {
  status: string;
  version: string;
  artifacts: Record<string, string>;
}

export interface ErrorBody {
  error: { type: string; message: string };
}

export type Group = 'control' | 'treatment';
