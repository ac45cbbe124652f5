// Thin fetch client for the session service; the console has no other backend.

import { FinalReport, RealizationPayload, ScenarioInfo, SessionHandle, StepResponse } from './types';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, body?: unknown): Promise<T> {
  const resp = await fetch(base + path, body === undefined ? undefined : {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
  });
  const payload = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, payload.error ?? `HTTP ${resp.status}`);
  }
  return payload as T;
}

export class Client {
  constructor(readonly base: string = '') {}

  scenarios(): Promise<{ scenarios: ScenarioInfo[] }> {
    return request(this.base, '/scenarios');
  }

  createSession(scenarioId: string, condition: string): Promise<SessionHandle> {
    return request(this.base, '/sessions', { scenario_id: scenarioId, condition });
  }

  submitDemo(sessionId: string, demo: Record<string, unknown>): Promise<StepResponse> {
    return request(this.base, `/sessions/${sessionId}/demos`, demo);
  }

  requestRealization(sessionId: string, testItem: number):
      Promise<{ realization: RealizationPayload }> {
    return request(this.base, `/sessions/${sessionId}/realizations`, { test_item: testItem });
  }

  stopSession(sessionId: string): Promise<FinalReport> {
    return request(this.base, `/sessions/${sessionId}/stop`, {});
  }
}
