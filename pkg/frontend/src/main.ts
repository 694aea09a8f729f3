import { DriftMeter, FpsMeter } from './hud.js';
import { InputThrottle } from './input.js';
import { SessionClient } from './net.js';
import { drawScene } from './render.js';
import { ViewState } from './view.js';

const params = new URLSearchParams(window.location.search);
const serverUrl = params.get('server') ?? 'ws://127.0.0.1:8700';
const session = params.get('session') ?? 's1';
const role = (params.get('role') ?? 'p1') as 'p1' | 'p2' | 'view';

const canvas = document.getElementById('scene') as HTMLCanvasElement;
const hudEl = document.getElementById('hud') as HTMLDivElement;
const overlayEl = document.getElementById('overlay') as HTMLDivElement;
const ctx = canvas.getContext('2d');
if (!ctx) {
  throw new Error('canvas 2d context unavailable');
}

const cfg = { widthPx: canvas.width, heightPx: canvas.height, cursorYPx: canvas.height * 0.7 };
const view = new ViewState();
const fps = new FpsMeter();
const drift = new DriftMeter();
const throttle = new InputThrottle();

const client = new SessionClient({
  onStatus: (status) => {
    view.status = status;
    overlayEl.style.display = status === 'open' ? 'none' : 'flex';
    overlayEl.textContent = status === 'closed' || status === 'error'
      ? `connection ${status} — reload to reconnect`
      : 'connecting…';
  },
  onMessage: (msg) => {
    const now = performance.now();
    switch (msg.type) {
      case 'welcome':
        break;
      case 'frame':
        view.buffer.push(msg, now);
        drift.observe(msg.t_ms, now);
        break;
      case 'choice_result':
        view.recordResult(msg.performance);
        break;
      case 'end':
        view.endSummary = msg.report_summary;
        break;
      case 'error':
        overlayEl.style.display = 'flex';
        overlayEl.textContent = `server error: ${msg.message}`;
        break;
    }
  },
});
client.connect(serverUrl, session, role);

canvas.addEventListener('pointermove', (ev) => {
  const rect = canvas.getBoundingClientRect();
  const px = (ev.clientX - rect.left) * (canvas.width / rect.width);
  throttle.pointer(px, canvas.width / 2);
});

function hudText(): string {
  const p = view.progress;
  const parts = [
    `fps ${fps.fps}`,
    `jitter ${drift.spreadMs.toFixed(1)} ms`,
    `choices ${p.choicesDone}`,
  ];
  if (p.lastPerformance !== null && p.meanPerformance !== null) {
    parts.push(`perf ${p.lastPerformance.toFixed(2)} (mean ${p.meanPerformance.toFixed(2)})`);
  }
  if (view.endSummary) {
    const driftMs = view.endSummary['max_drift_ms'];
    parts.push(`trial done — server drift ${Number(driftMs).toFixed(1)} ms`);
  }
  return parts.join('  |  ');
}

function frame(nowMs: number): void {
  requestAnimationFrame(frame);
  const input = throttle.flush();
  if (input && role !== 'view') {
    client.sendInput(input);
  }
  const sample = view.buffer.sample(nowMs);
  if (sample && ctx) {
    drawScene(ctx, sample.frame, sample.cursorXMm, sample.ownXMm, cfg);
    fps.tick(nowMs);
  }
  hudEl.textContent = hudText();
}

requestAnimationFrame(frame);
