import { describe, expect, it } from 'vitest';

import {
  FLOW_WINDOW,
  STALE_AFTER_MS,
  applyMessage,
  initialState,
  isStale,
  setConnection,
  timeline,
} from '../src/state.js';
import type { AlertMessage, FlowMessage, StateMessage } from '../src/types.js';

function stateMessage(overrides: Partial<StateMessage> = {}): StateMessage {
  return {
    type: 'state',
    ts: 10,
    level: 500,
    level_pct: 50,
    running: true,
    light: true,
    ls1: false,
    ls2: false,
    pump1: true,
    pump2: false,
    valve: false,
    phase: 'filling',
    tick: 10,
    alert_count: 0,
    ...overrides,
  };
}

function flowMessage(overrides: Partial<FlowMessage> = {}): FlowMessage {
  return {
    type: 'flow',
    src: '10.0.0.20:51000',
    dst: '10.0.0.10:502',
    state: 'open',
    label: 'normal',
    features: [6, 346, 4, 2, 228, 51000],
    ...overrides,
  };
}

function alertMessage(overrides: Partial<AlertMessage> = {}): AlertMessage {
  return {
    type: 'alert',
    id: 1,
    ts: 30,
    model: 'decision_tree',
    src: '10.0.0.60:50001',
    dst: '10.0.0.10:502',
    sport: 50001,
    tot_pkts: 2,
    attack_kind: 'port_scan',
    ...overrides,
  };
}

describe('applyMessage', () => {
  it('keeps the latest plant snapshot and stamps the tick time', () => {
    const s = initialState();
    applyMessage(s, stateMessage({ tick: 1 }), 1000);
    applyMessage(s, stateMessage({ tick: 2, level_pct: 60 }), 2000);
    expect(s.plant?.tick).toBe(2);
    expect(s.plant?.level_pct).toBe(60);
    expect(s.lastTickAt).toBe(2000);
  });

  it('counts flows by label and half-open state', () => {
    const s = initialState();
    applyMessage(s, flowMessage(), 0);
    applyMessage(s, flowMessage({ label: 'attack', state: 'half_open' }), 0);
    applyMessage(s, flowMessage({ label: 'attack', state: 'closed_fin' }), 0);
    expect(s.flowCount).toBe(3);
    expect(s.attackFlowCount).toBe(2);
    expect(s.halfOpenCount).toBe(1);
  });

  it('caps the recent-flow window', () => {
    const s = initialState();
    for (let i = 0; i < FLOW_WINDOW + 25; i++) {
      applyMessage(s, flowMessage({ features: [i, 0, 0, 0, 0, 0] }), 0);
    }
    expect(s.recentFlows).toHaveLength(FLOW_WINDOW);
    expect(s.recentFlows[0].features[0]).toBe(25);
    expect(s.flowCount).toBe(FLOW_WINDOW + 25);
  });

  it('deduplicates alerts by id across a reconnect replay', () => {
    const s = initialState();
    applyMessage(s, alertMessage({ id: 1, ts: 30 }), 0);
    applyMessage(s, alertMessage({ id: 2, ts: 40 }), 0);
    applyMessage(s, alertMessage({ id: 1, ts: 30 }), 0); // replayed
    expect(s.alerts.map((a) => a.id)).toEqual([1, 2]);
  });

  it('keeps the alert feed in timestamp order', () => {
    const s = initialState();
    applyMessage(s, alertMessage({ id: 5, ts: 50 }), 0);
    applyMessage(s, alertMessage({ id: 3, ts: 20 }), 0);
    applyMessage(s, alertMessage({ id: 4, ts: 50 }), 0);
    expect(s.alerts.map((a) => a.id)).toEqual([3, 4, 5]);
  });
});

describe('isStale', () => {
  it('is false while disconnected (the banner covers that case)', () => {
    const s = initialState();
    expect(isStale(s, 99999)).toBe(false);
  });

  it('trips after the stale window without a tick', () => {
    const s = setConnection(initialState(), 'open');
    applyMessage(s, stateMessage(), 1000);
    expect(isStale(s, 1000 + STALE_AFTER_MS)).toBe(false);
    expect(isStale(s, 1001 + STALE_AFTER_MS)).toBe(true);
  });

  it('is stale when open but nothing has arrived yet', () => {
    const s = setConnection(initialState(), 'open');
    expect(isStale(s, 0)).toBe(true);
  });
});

describe('timeline', () => {
  it('interleaves ground-truth markers with alerts by time', () => {
    const s = initialState();
    applyMessage(s, { type: 'ground_truth', kind: 'port_scan', start: 10 }, 0);
    applyMessage(s, alertMessage({ id: 1, ts: 15 }), 0);
    applyMessage(s, { type: 'ground_truth', kind: 'coil_read_exploit', start: 20 }, 0);
    const entries = timeline(s);
    expect(entries.map((e) => e.kind)).toEqual(['marker', 'alert', 'marker']);
    expect(entries[0].text).toContain('port_scan');
    expect(entries[1].text).toContain('decision_tree');
  });
});
