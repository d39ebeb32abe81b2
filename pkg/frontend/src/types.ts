// Wire types of the prediction service. The UI renders these fields
// verbatim; it never recomputes probabilities, buckets or attention.

export type JudgmentLabel = "reject" | "partially_support" | "support";
export type Bucket = "certain" | "uncertain" | "other";
export type OverrideState = "none" | "forced-true" | "forced-false";

export interface ClaimResult {
  index: number;
  distribution: number[];
  label: JudgmentLabel;
}

export interface FactResult {
  label: string;
  probability: number;
  model_probability: number;
  bucket: Bucket;
  overridden: boolean;
}

export interface AttentionMaps {
  word_level_utterances: number[][];
  word_level_claims: number[][];
  debate_to_claim: number[][] | null;
  debate_to_fact: number[][] | null;
  fact_to_claim: number[][] | null;
  across_claim_per_hop: number[][][] | null;
}

export interface PredictionResponse {
  schema_version: number;
  case_id: string;
  claims: ClaimResult[];
  facts: FactResult[];
  judgment_labels: JudgmentLabel[];
  attention: AttentionMaps;
}

export interface ModelInfo {
  schema_version: number;
  embed_dim: number;
  role_dim: number;
  hidden_dim: number;
  hops: number;
  vocab_size: number;
  checkpoint_hash: string;
  fact_labels: string[];
  judgment_labels: JudgmentLabel[];
}

export interface UtterancePayload {
  role: string;
  text: string;
}

export interface CasePayload {
  case_id?: string;
  claims: { text: string }[];
  utterances: UtterancePayload[];
}
