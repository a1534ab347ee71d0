/** Wire types for the session API. */

export interface DatasetInfo {
  name: string;
  height: number;
  width: number;
  kind: "image_patch" | "spectrum";
  has_oracle_score: boolean;
}

export interface SessionRow {
  id: string;
  dataset: string;
  phase: string;
  k: number;
}

export interface Incumbent {
  location: number;
  utility: number;
  oracle_score: number | null;
}

export interface StateSummary {
  id: string;
  dataset: string;
  phase: string;
  k: number;
  explored_count: number;
  total_locations: number;
  incumbent: Incumbent | null;
  config: Record<string, unknown>;
  created_at: string;
  updated_at: string;
}

export interface ImagePayload {
  kind: "image_patch";
  location: number;
  shape: [number, number];
  values: number[];
}

export interface SpectrumPayload {
  kind: "spectrum";
  location: number;
  channels: number[][];
}

export type Payload = ImagePayload | SpectrumPayload;

export interface PendingComparison {
  new_location: number;
  opponent: number;
  new_payload: Payload;
  opponent_payload: Payload;
}

export interface PendingVotes {
  type: "votes";
  phase: string;
  comparisons: PendingComparison[];
}

export interface PendingValidationEntry {
  log_index: number;
  winner: number;
  loser: number;
  new_location: number;
  opponent: number;
  new_is_winner: boolean;
  iteration: number;
  new_payload: Payload;
  opponent_payload: Payload;
}

export interface PendingValidation {
  type: "validation";
  phase: string;
  entries: PendingValidationEntry[];
}

export type Pending = PendingVotes | PendingValidation | null;

export interface VoteItem {
  new_location: number;
  opponent: number;
  preferred: number;
}

export interface ExploredPoint {
  location: number;
  utility: number | null;
}

export interface MapBody {
  height: number;
  width: number;
  mean: number[] | null;
  variance: number[] | null;
  explored: ExploredPoint[];
  baseline: number[] | null;
}

export interface IterationRow {
  k: number;
  incumbent: number;
  incumbent_utility: number;
  incumbent_oracle_score: number | null;
  votes_by_source: Record<string, number>;
}

export interface ValidationRow {
  k: number;
  pending: number;
  flips: number;
  rate: number;
}

export interface MetricsBody {
  iterations: IterationRow[];
  validations: ValidationRow[];
  votes_by_source: Record<string, number>;
  init_votes: number;
}
