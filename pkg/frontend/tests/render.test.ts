import { describe, expect, it } from 'vitest';
import type { PathPoint } from '../src/protocol.js';
import { cursorX, offsetToY, pathPolylines, SCROLL_SPEED_MM_S } from '../src/render.js';

const cfg = { widthPx: 640, heightPx: 640, cursorYPx: 448 };

describe('scene geometry', () => {
  it('scrolls the path downward at 35 mm/s', () => {
    expect(SCROLL_SPEED_MM_S).toBe(35);
    const y0 = offsetToY(0, cfg.cursorYPx);
    const y1 = offsetToY(1000, cfg.cursorYPx);
    expect(y0).toBe(cfg.cursorYPx);
    // one second of look-ahead sits 35 mm * 3.2 px/mm above the cursor line
    expect(y0 - y1).toBeCloseTo(112, 9);
  });

  it('renders a single polyline while the branches coincide', () => {
    const window: PathPoint[] = [[0, 0, 0], [20, 1.5, 1.5]];
    const lines = pathPolylines(window, null, cfg);
    expect(lines).toHaveLength(1);
    expect(lines[0].emphasized).toBe(false);
  });

  it('renders both branches with only this client highlight emphasized', () => {
    const window: PathPoint[] = [[0, 0, 0], [500, -25, 25]];
    const lines = pathPolylines(window, 'left', cfg);
    expect(lines).toHaveLength(2);
    expect(lines[0].emphasized).toBe(true);   // left
    expect(lines[1].emphasized).toBe(false);  // right
    const noCue = pathPolylines(window, null, cfg);
    expect(noCue.every((l) => !l.emphasized)).toBe(true);
  });

  it('maps lateral mm to screen px around the canvas center', () => {
    expect(cursorX(0, cfg)).toBe(320);
    expect(cursorX(25, cfg)).toBe(400); // +80 px
    const window: PathPoint[] = [[0, -25, 25]];
    const lines = pathPolylines(window, null, cfg);
    expect(lines[0].points[0][0]).toBe(240);
    expect(lines[1].points[0][0]).toBe(400);
  });
});
