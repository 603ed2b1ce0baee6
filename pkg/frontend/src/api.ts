// Thin typed client for the orchestrator HTTP endpoints.

import type { AttackRequest } from './format.js';
import type { MetricsPayload } from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function raiseForStatus(response: Response): Promise<Response> {
  if (response.ok) return response;
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  async sendCommand(name: 'on' | 'off'): Promise<void> {
    await raiseForStatus(await fetch(`${this.base}/api/commands/${name}`, { method: 'POST' }));
  }

  async launchAttack(request: AttackRequest): Promise<void> {
    await raiseForStatus(
      await fetch(`${this.base}/api/attacks`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(request),
      }),
    );
  }

  async metrics(): Promise<MetricsPayload> {
    const response = await raiseForStatus(await fetch(`${this.base}/api/metrics`));
    return (await response.json()) as MetricsPayload;
  }
}
