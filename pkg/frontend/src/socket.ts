// WebSocket wrapper with exponential-backoff reconnect.  The socket
// factory and timer functions are injectable so the policy is testable
// without a network.

export interface SocketLike {
  onopen: ((ev: unknown) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  close(): void;
}

export interface ReconnectOptions {
  factory?: (url: string) => SocketLike;
  onMessage: (payload: unknown) => void;
  onStatus: (status: 'connecting' | 'open' | 'closed') => void;
  baseDelayMs?: number;
  maxDelayMs?: number;
  setTimer?: (fn: () => void, ms: number) => unknown;
}

export function backoffDelay(attempt: number, baseMs: number, maxMs: number): number {
  return Math.min(baseMs * 2 ** attempt, maxMs);
}

export class ReconnectingSocket {
  private readonly url: string;
  private readonly factory: (url: string) => SocketLike;
  private readonly setTimer: (fn: () => void, ms: number) => unknown;
  private readonly baseDelayMs: number;
  private readonly maxDelayMs: number;
  private readonly onMessage: (payload: unknown) => void;
  private readonly onStatus: (status: 'connecting' | 'open' | 'closed') => void;
  private socket: SocketLike | null = null;
  private attempts = 0;
  private stopped = false;

  constructor(url: string, options: ReconnectOptions) {
    this.url = url;
    this.factory = options.factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.setTimer = options.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
    this.baseDelayMs = options.baseDelayMs ?? 1000;
    this.maxDelayMs = options.maxDelayMs ?? 30000;
    this.onMessage = options.onMessage;
    this.onStatus = options.onStatus;
  }

  connect(): void {
    if (this.stopped) return;
    this.onStatus('connecting');
    let socket: SocketLike;
    try {
      socket = this.factory(this.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.onStatus('open');
    };
    socket.onmessage = (ev) => {
      try {
        this.onMessage(JSON.parse(ev.data));
      } catch {
        // a malformed frame is dropped, never fatal
      }
    };
    socket.onerror = () => {
      /* the close handler drives reconnection */
    };
    socket.onclose = () => {
      this.onStatus('closed');
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.stopped) return;
    const delay = backoffDelay(this.attempts, this.baseDelayMs, this.maxDelayMs);
    this.attempts += 1;
    this.setTimer(() => this.connect(), delay);
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
  }
}
