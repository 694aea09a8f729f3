// Scene geometry and canvas drawing. The path scrolls downward: a point
// t_offset_ms ahead of now is drawn above the cursor line by
// scroll_speed * t_offset. Geometry is computed by pure functions so it
// can be unit-tested without a canvas.

import type { FrameMsg, PathPoint } from './protocol.js';
import { mmToPx } from './units.js';

export const SCROLL_SPEED_MM_S = 35;
export const CURSOR_COLORS: Record<FrameMsg['color'], string> = {
  green: '#2ecc40',
  orange: '#ff851b',
  red: '#ff4136',
};

export interface SceneConfig {
  widthPx: number;
  heightPx: number;
  cursorYPx: number; // screen line the cursor sits on
}

export interface Polyline {
  points: Array<[x: number, y: number]>;
  emphasized: boolean;
}

/** Vertical pixel offset for a path sample t_offset_ms ahead of now. */
export function offsetToY(tOffsetMs: number, cursorYPx: number): number {
  return cursorYPx - mmToPx((SCROLL_SPEED_MM_S * tOffsetMs) / 1000);
}

/**
 * Left/right branch polylines for the look-ahead window. Where both
 * branches coincide the single path is carried by the left polyline. The
 * highlighted side (this client's cue only) is emphasized.
 */
export function pathPolylines(window: PathPoint[], highlight: FrameMsg['highlight'],
                              cfg: SceneConfig): Polyline[] {
  const centerX = cfg.widthPx / 2;
  const left: Array<[number, number]> = [];
  const right: Array<[number, number]> = [];
  let forked = false;
  for (const [tOff, lMm, rMm] of window) {
    const y = offsetToY(tOff, cfg.cursorYPx);
    left.push([centerX + mmToPx(lMm), y]);
    right.push([centerX + mmToPx(rMm), y]);
    if (lMm !== rMm) forked = true;
  }
  if (!forked) {
    return [{ points: left, emphasized: false }];
  }
  return [
    { points: left, emphasized: highlight === 'left' },
    { points: right, emphasized: highlight === 'right' },
  ];
}

export function cursorX(cursorMm: number, cfg: SceneConfig): number {
  return cfg.widthPx / 2 + mmToPx(cursorMm);
}

export function drawScene(ctx: CanvasRenderingContext2D, frame: FrameMsg,
                          cursorMm: number, ownMm: number, cfg: SceneConfig): void {
  ctx.fillStyle = '#000';
  ctx.fillRect(0, 0, cfg.widthPx, cfg.heightPx);
  for (const line of pathPolylines(frame.path_window, frame.highlight, cfg)) {
    ctx.beginPath();
    ctx.strokeStyle = line.emphasized ? '#ffdc00' : '#ffffff';
    ctx.lineWidth = line.emphasized ? 4 : 2;
    for (let i = 0; i < line.points.length; i++) {
      const [x, y] = line.points[i];
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
  // own handle: faint tick under the cursor line
  ctx.strokeStyle = '#7fdbff';
  ctx.lineWidth = 2;
  const ox = cfg.widthPx / 2 + mmToPx(ownMm);
  ctx.beginPath();
  ctx.moveTo(ox, cfg.cursorYPx + 14);
  ctx.lineTo(ox, cfg.cursorYPx + 26);
  ctx.stroke();
  // shared cursor with the server-provided performance color
  ctx.fillStyle = CURSOR_COLORS[frame.color];
  ctx.beginPath();
  ctx.arc(cursorX(cursorMm, cfg), cfg.cursorYPx, 9, 0, Math.PI * 2);
  ctx.fill();
}
