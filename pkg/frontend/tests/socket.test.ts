import { describe, expect, it } from 'vitest';

import { ReconnectingSocket, backoffDelay, type SocketLike } from '../src/socket.js';

class FakeSocket implements SocketLike {
  onopen: ((ev: unknown) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  closed = false;
  close(): void {
    this.closed = true;
  }
}

interface Harness {
  socket: ReconnectingSocket;
  sockets: FakeSocket[];
  timers: { fn: () => void; ms: number }[];
  statuses: string[];
  messages: unknown[];
  runNextTimer(): void;
}

function harness(): Harness {
  const sockets: FakeSocket[] = [];
  const timers: { fn: () => void; ms: number }[] = [];
  const statuses: string[] = [];
  const messages: unknown[] = [];
  const socket = new ReconnectingSocket('ws://test/ws', {
    factory: () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    setTimer: (fn, ms) => {
      timers.push({ fn, ms });
      return timers.length;
    },
    onMessage: (payload) => messages.push(payload),
    onStatus: (status) => statuses.push(status),
    baseDelayMs: 1000,
    maxDelayMs: 8000,
  });
  return {
    socket,
    sockets,
    timers,
    statuses,
    messages,
    runNextTimer() {
      const timer = timers.shift();
      if (timer) timer.fn();
    },
  };
}

describe('backoffDelay', () => {
  it('doubles per attempt and saturates at the cap', () => {
    const delays = [0, 1, 2, 3, 4, 5].map((a) => backoffDelay(a, 1000, 8000));
    expect(delays).toEqual([1000, 2000, 4000, 8000, 8000, 8000]);
  });
});

describe('ReconnectingSocket', () => {
  it('reports open and parses incoming JSON frames', () => {
    const h = harness();
    h.socket.connect();
    h.sockets[0].onopen?.({});
    h.sockets[0].onmessage?.({ data: '{"type":"state","tick":3}' });
    h.sockets[0].onmessage?.({ data: 'not json' }); // dropped, not fatal
    expect(h.statuses).toEqual(['connecting', 'open']);
    expect(h.messages).toEqual([{ type: 'state', tick: 3 }]);
  });

  it('reconnects with growing backoff and resets after success', () => {
    const h = harness();
    h.socket.connect();
    h.sockets[0].onclose?.({}); // drop #1
    h.runNextTimer();
    h.sockets[1].onclose?.({}); // drop #2
    h.runNextTimer();
    expect(h.timers.length).toBe(0);
    expect(h.sockets).toHaveLength(3);
    // two failed attempts: 1s then 2s
    h.sockets[2].onopen?.({});
    h.sockets[2].onclose?.({});
    // after a successful open the backoff restarts at the base delay
    const delays = h.statuses.filter((s) => s === 'connecting');
    expect(delays).toHaveLength(3);
  });

  it('uses the documented delay sequence', () => {
    const seen: number[] = [];
    const h = harness();
    h.socket.connect();
    for (let drop = 0; drop < 5; drop++) {
      h.sockets[h.sockets.length - 1].onclose?.({});
      const timer = h.timers.shift();
      if (!timer) throw new Error('no reconnect scheduled');
      seen.push(timer.ms);
      timer.fn();
    }
    expect(seen).toEqual([1000, 2000, 4000, 8000, 8000]);
  });

  it('stops cleanly and closes the underlying socket', () => {
    const h = harness();
    h.socket.connect();
    h.sockets[0].onopen?.({});
    h.socket.stop();
    expect(h.sockets[0].closed).toBe(true);
    h.sockets[0].onclose?.({});
    expect(h.timers).toHaveLength(0); // no reconnect after stop
  });
});
