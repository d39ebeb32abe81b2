// Thin fetch client for the prediction service.

import type { CasePayload, ModelInfo, PredictionResponse } from "./types.js";

export class ServiceError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function post<T>(url: string, body: unknown): Promise<T> {
  const response = await fetch(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  const payload = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = (payload as { error?: string }).error ?? response.statusText;
    throw new ServiceError(response.status, detail);
  }
  return payload as T;
}

export class ServiceClient {
  baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  predict(casePayload: CasePayload): Promise<PredictionResponse> {
    return post(`${this.baseUrl}/predict`, casePayload);
  }

  predictWithOverrides(
    casePayload: CasePayload,
    overrides: Record<string, number>,
  ): Promise<PredictionResponse> {
    return post(`${this.baseUrl}/predict_with_overrides`, { ...casePayload, overrides });
  }

  async modelInfo(): Promise<ModelInfo> {
    const response = await fetch(`${this.baseUrl}/model/info`);
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (payload as { error?: string }).error ?? response.statusText;
      throw new ServiceError(response.status, detail);
    }
    return payload as ModelInfo;
  }
}
