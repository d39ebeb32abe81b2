// Full review workflow against a mocked service: load -> predict ->
// override a decisive fact -> re-predict (flip lands in the change
// summary) -> clear overrides -> the original view is restored.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeAll, describe, expect, it, vi } from "vitest";

import type { PredictionResponse } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const html = readFileSync(join(here, "..", "static", "index.html"), "utf-8");

const casePayload = {
  case_id: "case_flip",
  claims: [{ text: "demand_on topic_repayment of amount_3" }],
  utterances: [
    { role: "judge", text: "court_opens case_called" },
    { role: "plaintiff", text: "topic_loan confirmed_on_record" },
    { role: "defendant", text: "topic_repayment denied_on_record" },
  ],
};

const baseline: PredictionResponse = {
  schema_version: 1,
  case_id: "case_flip",
  claims: [{ index: 0, label: "support", distribution: [0.02, 0.08, 0.9] }],
  facts: [
    {
      label: "repayment_behavior",
      probability: 0.12,
      model_probability: 0.12,
      bucket: "other",
      overridden: false,
    },
    {
      label: "loan_established",
      probability: 0.97,
      model_probability: 0.97,
      bucket: "certain",
      overridden: false,
    },
  ],
  judgment_labels: ["reject", "partially_support", "support"],
  attention: {
    word_level_utterances: [[1.0], [0.6, 0.4], [0.3, 0.7]],
    word_level_claims: [[0.2, 0.3, 0.4, 0.1]],
    debate_to_claim: [[0.2, 0.3, 0.5]],
    debate_to_fact: null,
    fact_to_claim: null,
    across_claim_per_hop: null,
  },
};

// forcing repayment_behavior to 1 flips the claim to partially_support
const flipped: PredictionResponse = JSON.parse(JSON.stringify(baseline));
flipped.claims[0] = { index: 0, label: "partially_support", distribution: [0.03, 0.77, 0.2] };
flipped.facts[0] = { ...baseline.facts[0]!, probability: 1.0, overridden: true };

function installFetchMock() {
  const calls: { url: string; body?: unknown }[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, options?: RequestInit) => {
      const body = options?.body ? JSON.parse(options.body as string) : undefined;
      calls.push({ url: String(url), body });
      const respond = (payload: unknown) => ({
        ok: true,
        status: 200,
        statusText: "ok",
        json: async () => JSON.parse(JSON.stringify(payload)),
      });
      if (String(url).endsWith("/model/info")) {
        return respond({
          schema_version: 1,
          embed_dim: 32,
          role_dim: 32,
          hidden_dim: 32,
          hops: 2,
          vocab_size: 64,
          checkpoint_hash: "deadbeefdeadbeef",
          fact_labels: ["repayment_behavior", "loan_established"],
          judgment_labels: ["reject", "partially_support", "support"],
        });
      }
      if (String(url).endsWith("/predict_with_overrides")) {
        return respond(flipped);
      }
      return respond(baseline);
    }),
  );
  return calls;
}

async function flush() {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

describe("review workflow", () => {
  let calls: { url: string; body?: unknown }[];

  beforeAll(async () => {
    document.documentElement.innerHTML = html;
    calls = installFetchMock();
    const { initApp } = await import("../src/main.js");
    initApp();
    await flush();
  });

  it("loads a case and renders the baseline prediction", async () => {
    (document.getElementById("case-input") as HTMLTextAreaElement).value =
      JSON.stringify(casePayload);
    (document.getElementById("load-button") as HTMLButtonElement).click();
    await flush();

    const label = document.querySelector(".claim-card .label")!;
    expect(label.textContent).toBe("support");
    const probs = [...document.querySelectorAll(".dist-value")].map((n) => n.textContent);
    expect(probs).toEqual(["0.02", "0.08", "0.9"]);
    expect(document.querySelectorAll(".utterance")).toHaveLength(3);
    expect(calls.some((c) => c.url.endsWith("/predict"))).toBe(true);
  });

  it("rejects malformed input locally without a request", async () => {
    const requestsBefore = calls.length;
    (document.getElementById("case-input") as HTMLTextAreaElement).value = "{broken";
    (document.getElementById("load-button") as HTMLButtonElement).click();
    await flush();
    expect(document.getElementById("error")!.textContent).toMatch(/JSON/);
    expect(calls.length).toBe(requestsBefore);
    // restore the good case for the next steps
    (document.getElementById("case-input") as HTMLTextAreaElement).value =
      JSON.stringify(casePayload);
    (document.getElementById("load-button") as HTMLButtonElement).click();
    await flush();
  });

  it("override + re-predict flips the claim and lists it in the summary", async () => {
    const factRow = document.querySelector("[data-label='repayment_behavior']")!;
    (factRow.querySelector(".fact-toggle") as HTMLButtonElement).click(); // -> forced-true
    await flush();
    (document.getElementById("repredict-button") as HTMLButtonElement).click();
    await flush();

    const overrideCall = calls.find((c) => c.url.endsWith("/predict_with_overrides"));
    expect(overrideCall?.body).toMatchObject({ overrides: { repayment_behavior: 1.0 } });

    expect(document.querySelector(".claim-card .label")!.textContent).toBe("partially_support");
    const summary = document.getElementById("change-summary")!;
    expect(summary.textContent).toContain("claim 1");
    expect(summary.textContent).toContain("support");
    expect(summary.textContent).toContain("partially_support");
    expect(
      document.querySelector("[data-label='repayment_behavior'] .fact-overridden"),
    ).not.toBeNull();
  });

  it("clearing all overrides restores the original view", async () => {
    const claimsBefore = () => document.getElementById("claims")!.innerHTML;
    const factsBefore = () => document.getElementById("facts")!.innerHTML;

    const toggle = () =>
      (
        document.querySelector("[data-label='repayment_behavior'] .fact-toggle") as HTMLButtonElement
      ).click();
    toggle(); // forced-true -> forced-false
    toggle(); // forced-false -> none
    await flush();
    (document.getElementById("repredict-button") as HTMLButtonElement).click();
    await flush();

    // with no active overrides the plain /predict endpoint serves the view
    const last = calls[calls.length - 1]!;
    expect(last.url.endsWith("/predict")).toBe(true);
    expect(document.querySelector(".claim-card .label")!.textContent).toBe("support");
    const probs = [...document.querySelectorAll(".dist-value")].map((n) => n.textContent);
    expect(probs).toEqual(["0.02", "0.08", "0.9"]);
    expect(document.querySelector(".fact-overridden")).toBeNull();

    // identical render to a fresh baseline load
    const snapshotClaims = claimsBefore();
    const snapshotFacts = factsBefore();
    (document.getElementById("load-button") as HTMLButtonElement).click();
    await flush();
    expect(claimsBefore()).toBe(snapshotClaims);
    expect(factsBefore()).toBe(snapshotFacts);
  });

  it("out-of-range claim selection is a warned no-op", async () => {
    const warn = vi.spyOn(console, "warn").mockImplementation(() => undefined);
    const { selectClaim } = await import("../src/main.js");
    const before = document.getElementById("claims")!.innerHTML;
    selectClaim(99);
    await flush();
    expect(console.warn).toHaveBeenCalled();
    expect(document.getElementById("claims")!.innerHTML).toBe(before);
    warn.mockRestore();
  });
});
