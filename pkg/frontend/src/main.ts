// Application wiring: load a case, predict, explore attention, override
// facts, re-predict. At most one request is in flight; stale responses
// are dropped.

import { ServiceClient, ServiceError } from "./api.js";
import {
  renderChangeSummary,
  renderClaims,
  renderDebate,
  renderError,
  renderFacts,
} from "./render.js";
import type { CasePayload, OverrideState, PredictionResponse } from "./types.js";
import {
  attentionRowForClaim,
  changeSummary,
  cycleOverride,
  hasActiveOverrides,
  overridesToRequest,
  parseCasePayload,
  topUtteranceIndex,
} from "./viewmodel.js";

interface AppState {
  payload: CasePayload | null;
  baseline: PredictionResponse | null; // first prediction, no overrides
  current: PredictionResponse | null;
  selectedClaim: number;
  overrides: Map<string, OverrideState>;
  requestCounter: number;
}

const state: AppState = {
  payload: null,
  baseline: null,
  current: null,
  selectedClaim: 0,
  overrides: new Map(),
  requestCounter: 0,
};

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function client(): ServiceClient {
  const input = byId("service-url") as HTMLInputElement;
  return new ServiceClient(input.value || window.location.origin);
}

function redraw(): void {
  if (!state.payload || !state.current) return;
  const response = state.current;
  renderClaims(byId("claims"), response, state.payload, state.selectedClaim, selectClaim);
  const row = attentionRowForClaim(response, state.selectedClaim);
  renderDebate(byId("debate"), state.payload, row);
  renderFacts(
    byId("facts"),
    response.facts,
    (fact) => state.overrides.get(fact.label) ?? "none",
    toggleOverride,
  );
  const summaryBox = byId("change-summary");
  if (state.baseline && state.current !== state.baseline) {
    renderChangeSummary(summaryBox, changeSummary(state.baseline, state.current));
  } else {
    summaryBox.textContent = "";
  }
  const top = topUtteranceIndex(row);
  if (top >= 0) {
    const target = byId("debate").querySelector(`[data-index="${top}"]`);
    if (target && typeof target.scrollIntoView === "function") {
      target.scrollIntoView({ block: "nearest" });
    }
  }
}

export function selectClaim(index: number): void {
  const k = state.current?.claims.length ?? 0;
  if (index < 0 || index >= k) {
    console.warn(`claim index ${index} out of range (k=${k})`);
    return;
  }
  state.selectedClaim = index;
  redraw();
}

function toggleOverride(label: string): void {
  const next = cycleOverride(state.overrides.get(label) ?? "none");
  if (next === "none") state.overrides.delete(label);
  else state.overrides.set(label, next);
  redraw();
}

async function loadAndPredict(): Promise<void> {
  const text = (byId("case-input") as HTMLTextAreaElement).value;
  const parsed = parseCasePayload(text);
  if (!parsed.ok || !parsed.payload) {
    renderError(byId("error"), parsed.error ?? "invalid payload");
    return;
  }
  renderError(byId("error"), null);
  state.payload = parsed.payload;
  state.overrides.clear();
  state.selectedClaim = 0;
  const token = ++state.requestCounter;
  try {
    const response = await client().predict(parsed.payload);
    if (token !== state.requestCounter) return; // superseded
    state.baseline = response;
    state.current = response;
    redraw();
  } catch (error) {
    if (token !== state.requestCounter) return;
    const detail =
      error instanceof ServiceError ? `service ${error.status}: ${error.message}` : String(error);
    renderError(byId("error"), detail);
  }
}

async function repredict(): Promise<void> {
  if (!state.payload) return;
  renderError(byId("error"), null);
  const overrides = overridesToRequest(state.overrides);
  const token = ++state.requestCounter;
  try {
    const response = hasActiveOverrides(state.overrides)
      ? await client().predictWithOverrides(state.payload, overrides)
      : await client().predict(state.payload);
    if (token !== state.requestCounter) return;
    state.current = response;
    redraw();
  } catch (error) {
    if (token !== state.requestCounter) return;
    const detail =
      error instanceof ServiceError ? `service ${error.status}: ${error.message}` : String(error);
    renderError(byId("error"), detail); // view state intentionally unchanged
  }
}

async function refreshModelInfo(): Promise<void> {
  try {
    const info = await client().modelInfo();
    byId("model-info").textContent =
      `model: ${info.hidden_dim}h x ${info.hops} hops, vocab ${info.vocab_size}, ` +
      `checkpoint ${info.checkpoint_hash.slice(0, 12)}`;
  } catch (error) {
    byId("model-info").textContent = `model info unavailable: ${String(error)}`;
  }
}

export function initApp(): void {
  byId("load-button").addEventListener("click", () => void loadAndPredict());
  byId("repredict-button").addEventListener("click", () => void repredict());
  byId("service-url").addEventListener("change", () => void refreshModelInfo());
  const file = byId("case-file") as HTMLInputElement;
  file.addEventListener("change", async () => {
    const chosen = file.files?.[0];
    if (!chosen) return;
    (byId("case-input") as HTMLTextAreaElement).value = await chosen.text();
  });
  void refreshModelInfo();
}

if (typeof window !== "undefined" && document.getElementById("load-button")) {
  initApp();
}
