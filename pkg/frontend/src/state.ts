// View-model store: a pure reducer over the ordered WS message stream.
// The UI renders from this state and nothing else, so all the logic that
// matters is testable without a DOM.

import type {
  AlertMessage,
  FlowMessage,
  MarkerMessage,
  ServerMessage,
  StateMessage,
} from './types.js';

export const STALE_AFTER_MS = 3000;
export const FLOW_WINDOW = 50;

export type ConnectionStatus = 'connecting' | 'open' | 'closed';

export interface HmiState {
  connection: ConnectionStatus;
  /** wall-clock ms of the last state tick; drives the stale indicator */
  lastTickAt: number | null;
  plant: StateMessage | null;
  alerts: AlertMessage[];
  markers: MarkerMessage[];
  recentFlows: FlowMessage[];
  flowCount: number;
  attackFlowCount: number;
  halfOpenCount: number;
}

export function initialState(): HmiState {
  return {
    connection: 'connecting',
    lastTickAt: null,
    plant: null,
    alerts: [],
    markers: [],
    recentFlows: [],
    flowCount: 0,
    attackFlowCount: 0,
    halfOpenCount: 0,
  };
}

/** Apply one server message; returns the same object, mutated in place. */
export function applyMessage(state: HmiState, message: ServerMessage, nowMs: number): HmiState {
  switch (message.type) {
    case 'state':
      state.plant = message;
      state.lastTickAt = nowMs;
      break;
    case 'flow':
      state.flowCount += 1;
      if (message.label === 'attack') state.attackFlowCount += 1;
      if (message.state === 'half_open') state.halfOpenCount += 1;
      state.recentFlows.push(message);
      if (state.recentFlows.length > FLOW_WINDOW) {
        state.recentFlows.splice(0, state.recentFlows.length - FLOW_WINDOW);
      }
      break;
    case 'alert':
      // idempotent by alert id: a resubscribe after reconnect must not
      // duplicate entries, and the feed stays in timestamp order
      if (!state.alerts.some((a) => a.id === message.id)) {
        state.alerts.push(message);
        state.alerts.sort((a, b) => a.ts - b.ts || a.id - b.id);
      }
      break;
    case 'ground_truth':
      state.markers.push(message);
      break;
  }
  return state;
}

export function setConnection(state: HmiState, status: ConnectionStatus): HmiState {
  state.connection = status;
  return state;
}

/** True when connected but no state tick has arrived for STALE_AFTER_MS. */
export function isStale(state: HmiState, nowMs: number): boolean {
  if (state.connection !== 'open') return false;
  if (state.lastTickAt === null) return true;
  return nowMs - state.lastTickAt > STALE_AFTER_MS;
}

export interface TimelineEntry {
  at: number;
  kind: 'marker' | 'alert';
  text: string;
}

/** Ground-truth markers interleaved with alerts, oldest first. */
export function timeline(state: HmiState): TimelineEntry[] {
  const entries: TimelineEntry[] = [];
  for (const m of state.markers) {
    entries.push({ at: m.start, kind: 'marker', text: `launched ${m.kind}` });
  }
  for (const a of state.alerts) {
    const kind = a.attack_kind ?? 'unconfirmed';
    entries.push({ at: a.ts, kind: 'alert', text: `${a.model}: ${a.src} (${kind})` });
  }
  return entries.sort((x, y) => x.at - y.at);
}
