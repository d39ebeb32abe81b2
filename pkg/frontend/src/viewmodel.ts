// Pure view logic: payload validation, heat scaling, override bookkeeping,
// and the change summary between two predictions. Everything numeric shown
// on screen originates from a service response field.

import type {
  CasePayload,
  FactResult,
  OverrideState,
  PredictionResponse,
} from "./types.js";

export const ROLES = ["judge", "plaintiff", "defendant", "witness"] as const;

export interface ParseResult {
  ok: boolean;
  payload?: CasePayload;
  error?: string;
}

/** Validate pasted/loaded JSON locally; nothing is sent when this fails. */
export function parseCasePayload(text: string): ParseResult {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return { ok: false, error: "not valid JSON" };
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    return { ok: false, error: "payload must be a JSON object" };
  }
  const record = raw as Record<string, unknown>;
  const claims = record.claims;
  if (!Array.isArray(claims) || claims.length === 0) {
    return { ok: false, error: "payload needs a non-empty 'claims' array" };
  }
  for (let i = 0; i < claims.length; i++) {
    const claim = claims[i] as { text?: unknown };
    if (typeof claim?.text !== "string" || claim.text.trim() === "") {
      return { ok: false, error: `claims[${i}] needs non-empty 'text'` };
    }
  }
  const utterances = record.utterances;
  if (!Array.isArray(utterances) || utterances.length === 0) {
    return { ok: false, error: "payload needs a non-empty 'utterances' array" };
  }
  for (let i = 0; i < utterances.length; i++) {
    const utterance = utterances[i] as { role?: unknown; text?: unknown };
    if (typeof utterance?.text !== "string" || utterance.text.trim() === "") {
      return { ok: false, error: `utterances[${i}] needs non-empty 'text'` };
    }
    if (typeof utterance?.role !== "string" || !ROLES.includes(utterance.role as never)) {
      return { ok: false, error: `utterances[${i}] has unknown role '${String(utterance?.role)}'` };
    }
  }
  return {
    ok: true,
    payload: {
      case_id: typeof record.case_id === "string" ? record.case_id : undefined,
      claims: claims.map((c) => ({ text: (c as { text: string }).text })),
      utterances: utterances.map((u) => ({
        role: (u as { role: string }).role,
        text: (u as { text: string }).text,
      })),
    },
  };
}

/**
 * Per-claim display heat: min-max rescaling of the raw attention row so
 * near-uniform rows over long debates stay visible. Raw values are kept
 * for tooltips; a constant row renders as uniform half-heat.
 */
export function heatValues(row: number[] | null | undefined): number[] {
  if (!row || row.length === 0) return [];
  const lo = Math.min(...row);
  const hi = Math.max(...row);
  if (hi - lo < 1e-12) return row.map(() => 0.5);
  return row.map((v) => (v - lo) / (hi - lo));
}

export function attentionRowForClaim(
  response: PredictionResponse,
  claimIndex: number,
): number[] | null {
  const maps = response.attention.debate_to_claim;
  if (!maps || claimIndex < 0 || claimIndex >= maps.length) return null;
  return maps[claimIndex] ?? null;
}

export function topUtteranceIndex(row: number[] | null): number {
  if (!row || row.length === 0) return -1;
  let best = 0;
  for (let i = 1; i < row.length; i++) {
    if ((row[i] ?? -Infinity) > (row[best] ?? -Infinity)) best = i;
  }
  return best;
}

export interface ClaimChange {
  index: number;
  from: string;
  to: string;
}

/** Claims whose argmax label changed between two predictions. */
export function changeSummary(
  before: PredictionResponse,
  after: PredictionResponse,
): ClaimChange[] {
  const changes: ClaimChange[] = [];
  for (let i = 0; i < Math.min(before.claims.length, after.claims.length); i++) {
    const a = before.claims[i]!;
    const b = after.claims[i]!;
    if (a.label !== b.label) {
      changes.push({ index: i, from: a.label, to: b.label });
    }
  }
  return changes;
}

export type OverrideMap = Map<string, OverrideState>;

export function cycleOverride(state: OverrideState): OverrideState {
  if (state === "none") return "forced-true";
  if (state === "forced-true") return "forced-false";
  return "none";
}

/** Convert toggle states into the wire format (only forced entries). */
export function overridesToRequest(overrides: OverrideMap): Record<string, number> {
  const out: Record<string, number> = {};
  for (const [label, state] of overrides) {
    if (state === "forced-true") out[label] = 1.0;
    else if (state === "forced-false") out[label] = 0.0;
  }
  return out;
}

export function hasActiveOverrides(overrides: OverrideMap): boolean {
  return Object.keys(overridesToRequest(overrides)).length > 0;
}

export function factOverrideState(overrides: OverrideMap, fact: FactResult): OverrideState {
  return overrides.get(fact.label) ?? "none";
}
