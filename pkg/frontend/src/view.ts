// Client view state: the UI renders server frames and computes nothing of
// the game itself. A two-frame buffer lets the cursor be drawn at an
// interpolated position between 60 Hz snapshots.

import type { FrameMsg } from './protocol.js';

export interface Sample {
  tMs: number;
  cursorXMm: number;
  ownXMm: number;
  frame: FrameMsg; // latest frame: color, phase, highlight, path window
}

interface Buffered {
  frame: FrameMsg;
  recvMs: number;
}

export class FrameBuffer {
  private prev: Buffered | null = null;
  private latest: Buffered | null = null;

  push(frame: FrameMsg, recvMs: number): void {
    if (this.latest && frame.t_ms < this.latest.frame.t_ms) {
      return; // out of order; the simulation clock only moves forward
    }
    this.prev = this.latest;
    this.latest = { frame, recvMs };
  }

  get empty(): boolean {
    return this.latest === null;
  }

  /** Age of the newest frame, ms (staleness indicator for the HUD). */
  ageMs(nowMs: number): number {
    return this.latest ? nowMs - this.latest.recvMs : Number.POSITIVE_INFINITY;
  }

  /**
   * Interpolated view at wall time nowMs. Positions are interpolated
   * linearly between the two buffered frames using receive times; all
   * discrete fields come from the newest frame.
   */
  sample(nowMs: number): Sample | null {
    if (!this.latest) return null;
    const b = this.latest;
    if (!this.prev || b.recvMs === this.prev.recvMs) {
      return { tMs: b.frame.t_ms, cursorXMm: b.frame.cursor_x_mm,
               ownXMm: b.frame.own_x_mm, frame: b.frame };
    }
    const a = this.prev;
    const span = b.recvMs - a.recvMs;
    let alpha = (nowMs - b.recvMs) / span + 1.0;
    if (alpha < 0) alpha = 0;
    if (alpha > 1) alpha = 1;
    return {
      tMs: a.frame.t_ms + alpha * (b.frame.t_ms - a.frame.t_ms),
      cursorXMm: a.frame.cursor_x_mm + alpha * (b.frame.cursor_x_mm - a.frame.cursor_x_mm),
      ownXMm: a.frame.own_x_mm + alpha * (b.frame.own_x_mm - a.frame.own_x_mm),
      frame: b.frame,
    };
  }
}

export type ConnectionStatus = 'connecting' | 'open' | 'closed' | 'error';

export interface TrialProgress {
  choicesDone: number;
  lastPerformance: number | null;
  meanPerformance: number | null;
}

export class ViewState {
  buffer = new FrameBuffer();
  status: ConnectionStatus = 'connecting';
  progress: TrialProgress = { choicesDone: 0, lastPerformance: null, meanPerformance: null };
  endSummary: Record<string, unknown> | null = null;
  private perfSum = 0;

  recordResult(performance: number): void {
    this.progress.choicesDone += 1;
    this.progress.lastPerformance = performance;
    this.perfSum += performance;
    this.progress.meanPerformance = this.perfSum / this.progress.choicesDone;
  }
}
