// Payload types for the orchestrator HTTP/WS API.  Every field here maps
// one-to-one onto a field the server sends; the HMI adds nothing of its own.

export type Phase = 'idle' | 'filling' | 'draining';

export interface StateMessage {
  type: 'state';
  ts: number;
  level: number;
  level_pct: number;
  running: boolean;
  light: boolean;
  ls1: boolean;
  ls2: boolean;
  pump1: boolean;
  pump2: boolean;
  valve: boolean;
  phase: Phase;
  tick: number;
  alert_count: number;
}

export interface FlowMessage {
  type: 'flow';
  src: string;
  dst: string;
  state: 'open' | 'closed_fin' | 'closed_rst' | 'closed_idle' | 'half_open';
  label: 'normal' | 'attack';
  features: [number, number, number, number, number, number];
}

export interface AlertMessage {
  type: 'alert';
  id: number;
  ts: number;
  model: string;
  src: string;
  dst: string;
  sport: number;
  tot_pkts: number;
  attack_kind: string | null;
}

export interface MarkerMessage {
  type: 'ground_truth';
  kind: string;
  start: number;
}

export type ServerMessage = StateMessage | FlowMessage | AlertMessage | MarkerMessage;

export interface MetricsPayload {
  model: string | null;
  confusion?: { tp: number; tn: number; fp: number; fn: number };
  accuracy?: number;
  far?: number | null;
  und?: number | null;
}

export const ATTACK_KINDS = [
  'port_scan',
  'address_scan',
  'device_id',
  'device_id_aggressive',
  'coil_read_exploit',
] as const;

export type AttackKind = (typeof ATTACK_KINDS)[number];
