// Bootstrap: wire the WS stream into the store, the store into the
// renderer, and the controls into the HTTP client.

import { ApiClient, ApiError } from './api.js';
import { validateAttackForm } from './format.js';
import { ReconnectingSocket } from './socket.js';
import { applyMessage, initialState, setConnection } from './state.js';
import type { ServerMessage } from './types.js';
import { renderMetrics, renderState, showToast } from './view.js';

const state = initialState();
const api = new ApiClient();

const wsUrl = `${location.protocol === 'https:' ? 'wss' : 'ws'}://${location.host}/ws`;
const socket = new ReconnectingSocket(wsUrl, {
  onMessage: (payload) => {
    applyMessage(state, payload as ServerMessage, Date.now());
  },
  onStatus: (status) => {
    setConnection(state, status);
  },
});
socket.connect();

// render at display rate, decoupled from message arrival
setInterval(() => renderState(state, Date.now()), 100);

// metrics panel refresh
async function refreshMetrics(): Promise<void> {
  try {
    renderMetrics(await api.metrics());
  } catch {
    // leave the previous metrics up while the server is unreachable
  }
}
setInterval(refreshMetrics, 2000);
void refreshMetrics();

function button(id: string): HTMLButtonElement {
  return document.getElementById(id) as HTMLButtonElement;
}

button('btn-on').addEventListener('click', () => {
  api.sendCommand('on').catch((err) => showToast(String(err), true));
});
button('btn-off').addEventListener('click', () => {
  api.sendCommand('off').catch((err) => showToast(String(err), true));
});

button('btn-launch').addEventListener('click', () => {
  const form = {
    kind: (document.getElementById('attack-kind') as HTMLSelectElement).value,
    ports: (document.getElementById('attack-ports') as HTMLInputElement).value,
    sweeps: (document.getElementById('attack-sweeps') as HTMLInputElement).value,
    duration: (document.getElementById('attack-duration') as HTMLInputElement).value,
    sessions: (document.getElementById('attack-sessions') as HTMLInputElement).value,
  };
  const result = validateAttackForm(form);
  if (!result.ok) {
    showToast(result.error, true);
    return;
  }
  api
    .launchAttack(result.request)
    .then(() => showToast(`${result.request.kind} launched`, false))
    .catch((err) => {
      const detail = err instanceof ApiError ? err.message : String(err);
      showToast(detail, true);
    });
});
