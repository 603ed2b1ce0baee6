// DOM rendering: a single render pass from the view-model state.
// No simulation or classification happens here — every displayed number
// comes from an API payload field.

import { formatClock, formatPercent } from './format.js';
import { isStale, timeline, type HmiState } from './state.js';
import type { MetricsPayload } from './types.js';

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function setLamp(id: string, on: boolean): void {
  el(id).classList.toggle('on', on);
}

export function renderState(state: HmiState, nowMs: number): void {
  const banner = el('connection');
  banner.textContent =
    state.connection === 'open'
      ? isStale(state, nowMs)
        ? 'connected — no data for 3 s'
        : 'connected'
      : state.connection;
  banner.className = `banner ${state.connection}${isStale(state, nowMs) ? ' stale' : ''}`;

  const plant = state.plant;
  if (plant) {
    const water = el('water');
    water.style.height = `${Math.max(0, Math.min(100, plant.level_pct))}%`;
    el('level-label').textContent = formatPercent(plant.level_pct);
    el('phase').textContent = plant.phase;
    el('sim-clock').textContent = formatClock(plant.ts);
    setLamp('lamp-pump1', plant.pump1);
    setLamp('lamp-pump2', plant.pump2);
    setLamp('lamp-valve', plant.valve);
    setLamp('lamp-light', plant.light);
    setLamp('lamp-ls1', plant.ls1);
    setLamp('lamp-ls2', plant.ls2);
    el('running').textContent = plant.running ? 'running' : 'stopped';
  }

  el('flow-count').textContent = String(state.flowCount);
  el('attack-flow-count').textContent = String(state.attackFlowCount);
  el('half-open-count').textContent = String(state.halfOpenCount);

  const feed = el('timeline');
  feed.replaceChildren(
    ...timeline(state)
      .slice(-30)
      .reverse()
      .map((entry) => {
        const item = document.createElement('li');
        item.className = entry.kind;
        item.textContent = `[${formatClock(entry.at)}] ${entry.text}`;
        return item;
      }),
  );
}

export function renderMetrics(payload: MetricsPayload): void {
  const panel = el('metrics');
  if (payload.model === null) {
    panel.textContent = 'no model deployed';
    return;
  }
  const cm = payload.confusion;
  const rows = [
    `model: ${payload.model}`,
    `accuracy: ${formatPercent(payload.accuracy ?? null)}`,
    `false alarms: ${formatPercent(payload.far ?? null)}`,
    `missed attacks: ${formatPercent(payload.und ?? null)}`,
    cm ? `tp ${cm.tp} / tn ${cm.tn} / fp ${cm.fp} / fn ${cm.fn}` : '',
  ];
  panel.textContent = rows.filter(Boolean).join('\n');
}

export function showToast(message: string, isError: boolean): void {
  const toast = el('toast');
  toast.textContent = message;
  toast.className = `toast visible${isError ? ' error' : ''}`;
  setTimeout(() => {
    toast.className = 'toast';
  }, 4000);
}
