// Pure formatting and form-validation helpers for the HMI.

import { ATTACK_KINDS, type AttackKind } from './types.js';

export function formatPercent(value: number | null | undefined): string {
  if (value === null || value === undefined) return 'n/a';
  return `${value.toFixed(2)}%`;
}

export function formatClock(virtualSeconds: number): string {
  const total = Math.max(0, Math.floor(virtualSeconds));
  const h = Math.floor(total / 3600);
  const m = Math.floor((total % 3600) / 60);
  const s = total % 60;
  const pad = (n: number) => String(n).padStart(2, '0');
  return `${pad(h)}:${pad(m)}:${pad(s)}`;
}

export interface AttackForm {
  kind: string;
  ports?: string;
  sweeps?: string;
  duration?: string;
  sessions?: string;
}

export interface AttackRequest {
  kind: AttackKind;
  ports?: number[];
  sweeps?: number;
  duration?: number;
  sessions?: number;
}

export type FormResult =
  | { ok: true; request: AttackRequest }
  | { ok: false; error: string };

function parsePositiveInt(raw: string, field: string): number | string {
  const value = Number(raw);
  if (!Number.isInteger(value) || value <= 0) return `${field} must be a positive integer`;
  return value;
}

/** Validate the launcher form; only filled-in fields reach the request. */
export function validateAttackForm(form: AttackForm): FormResult {
  if (!(ATTACK_KINDS as readonly string[]).includes(form.kind)) {
    return { ok: false, error: `unknown attack kind '${form.kind}'` };
  }
  const request: AttackRequest = { kind: form.kind as AttackKind };
  if (form.ports && form.ports.trim() !== '') {
    const ports: number[] = [];
    for (const piece of form.ports.split(',')) {
      const port = Number(piece.trim());
      if (!Number.isInteger(port) || port < 1 || port > 65535) {
        return { ok: false, error: `'${piece.trim()}' is not a valid port` };
      }
      ports.push(port);
    }
    request.ports = ports;
  }
  for (const field of ['sweeps', 'duration', 'sessions'] as const) {
    const raw = form[field];
    if (raw && raw.trim() !== '') {
      const parsed = parsePositiveInt(raw.trim(), field);
      if (typeof parsed === 'string') return { ok: false, error: parsed };
      request[field] = parsed;
    }
  }
  return { ok: true, request };
}
