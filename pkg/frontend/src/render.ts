// DOM rendering. Numbers are printed with String(value), so what appears
// on screen is exactly what the service sent (tests compare verbatim).

import type { CasePayload, FactResult, OverrideState, PredictionResponse } from "./types.js";
import type { ClaimChange } from "./viewmodel.js";
import { heatValues } from "./viewmodel.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderClaims(
  container: HTMLElement,
  response: PredictionResponse,
  payload: CasePayload,
  selected: number,
  onSelect: (index: number) => void,
): void {
  container.textContent = "";
  response.claims.forEach((claim, i) => {
    const card = el("div", "claim-card" + (i === selected ? " selected" : ""));
    card.dataset.index = String(i);
    const head = el("div", "claim-head");
    head.appendChild(el("span", "claim-title", `Claim ${i + 1}`));
    head.appendChild(el("span", `label label-${claim.label}`, claim.label));
    card.appendChild(head);
    card.appendChild(el("div", "claim-text", payload.claims[i]?.text ?? ""));
    const dist = el("div", "distribution");
    response.judgment_labels.forEach((name, d) => {
      const cell = el("span", "dist-cell");
      cell.appendChild(el("span", "dist-name", name));
      const value = el("span", "dist-value", String(claim.distribution[d]));
      cell.appendChild(value);
      dist.appendChild(cell);
    });
    card.appendChild(dist);
    card.addEventListener("click", () => onSelect(i));
    container.appendChild(card);
  });
}

export function renderDebate(
  container: HTMLElement,
  payload: CasePayload,
  attentionRow: number[] | null,
): void {
  container.textContent = "";
  const heat = heatValues(attentionRow);
  payload.utterances.forEach((utterance, i) => {
    const row = el("div", "utterance");
    row.dataset.index = String(i);
    const weight = heat[i] ?? 0;
    // darker shading = more attention for the selected claim
    row.style.backgroundColor = `rgba(214, 138, 27, ${(0.12 + 0.7 * weight).toFixed(3)})`;
    if (attentionRow) {
      row.title = `attention ${String(attentionRow[i])}`;
    }
    row.appendChild(el("span", `role role-${utterance.role}`, utterance.role));
    row.appendChild(el("span", "utterance-text", utterance.text));
    container.appendChild(row);
  });
}

export function renderFacts(
  container: HTMLElement,
  facts: FactResult[],
  states: (fact: FactResult) => OverrideState,
  onToggle: (label: string) => void,
): void {
  container.textContent = "";
  facts.forEach((fact) => {
    const row = el("div", `fact bucket-${fact.bucket}`);
    row.dataset.label = fact.label;
    const name = el("span", "fact-name", fact.label);
    if (fact.bucket === "uncertain") {
      const warn = el("span", "fact-warning", "⚠");
      warn.title = "uncertain finding: potential controversy";
      name.appendChild(warn);
    }
    row.appendChild(name);
    const bar = el("span", "fact-bar");
    const fill = el("span", "fact-bar-fill");
    fill.style.width = `${Math.round(fact.probability * 100)}%`;
    bar.appendChild(fill);
    row.appendChild(bar);
    row.appendChild(el("span", "fact-probability", String(fact.probability)));
    row.appendChild(el("span", `fact-bucket badge-${fact.bucket}`, fact.bucket));
    if (fact.overridden) {
      row.appendChild(el("span", "fact-overridden", "overridden"));
    }
    const state = states(fact);
    const toggle = el("button", `fact-toggle state-${state}`);
    toggle.textContent = state === "none" ? "auto" : state === "forced-true" ? "force 1" : "force 0";
    toggle.addEventListener("click", () => onToggle(fact.label));
    row.appendChild(toggle);
    container.appendChild(row);
  });
}

export function renderChangeSummary(container: HTMLElement, changes: ClaimChange[]): void {
  container.textContent = "";
  if (changes.length === 0) {
    container.appendChild(el("div", "summary-none", "no claim changed its judgment"));
    return;
  }
  changes.forEach((change) => {
    container.appendChild(
      el(
        "div",
        "summary-change",
        `claim ${change.index + 1}: ${change.from} → ${change.to}`,
      ),
    );
  });
}

export function renderError(container: HTMLElement, message: string | null): void {
  container.textContent = message ?? "";
  container.classList.toggle("visible", message !== null);
}
