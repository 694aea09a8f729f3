// WebSocket session client: hello/welcome handshake, decoded message
// callbacks, and input sending with a short offline buffer.

import { decodeMessage, encodeMessage, makeHello, type Hello, type InputMsg,
         type ServerMessage } from './protocol.js';

const OFFLINE_BUFFER_MS = 250;

export interface ClientCallbacks {
  onMessage: (msg: ServerMessage) => void;
  onStatus: (status: 'connecting' | 'open' | 'closed' | 'error') => void;
}

export class SessionClient {
  private sock: WebSocket | null = null;
  private buffered: Array<{ text: string; atMs: number }> = [];

  constructor(private readonly callbacks: ClientCallbacks) {}

  connect(serverUrl: string, session: string, role: Hello['role']): void {
    this.callbacks.onStatus('connecting');
    const sock = new WebSocket(`${serverUrl}/session/${encodeURIComponent(session)}`);
    this.sock = sock;
    sock.onopen = () => {
      sock.send(encodeMessage(makeHello(role, session)));
      this.callbacks.onStatus('open');
      this.flushBuffered();
    };
    sock.onmessage = (ev) => {
      const msg = decodeMessage(String(ev.data));
      if (msg.type === 'hello' || msg.type === 'input') return; // not ours
      this.callbacks.onMessage(msg);
    };
    sock.onclose = () => this.callbacks.onStatus('closed');
    sock.onerror = () => this.callbacks.onStatus('error');
  }

  sendInput(msg: InputMsg): void {
    const text = encodeMessage(msg);
    if (this.sock && this.sock.readyState === WebSocket.OPEN) {
      this.sock.send(text);
      return;
    }
    // buffer briefly while (re)connecting; drop anything older than 250 ms
    const now = performance.now();
    this.buffered.push({ text, atMs: now });
    this.buffered = this.buffered.filter((b) => now - b.atMs <= OFFLINE_BUFFER_MS);
  }

  private flushBuffered(): void {
    const now = performance.now();
    for (const b of this.buffered) {
      if (now - b.atMs <= OFFLINE_BUFFER_MS && this.sock) {
        this.sock.send(b.text);
      }
    }
    this.buffered = [];
  }
}
