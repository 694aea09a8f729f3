// Pointer input: horizontal pointer position stands in for the 1-DOF
// handle. Raw pointer events arrive at device rate; at most one input
// message is emitted per animation frame, with a strictly increasing seq.

import { makeInput, type InputMsg } from './protocol.js';
import { pointerToHandleMm } from './units.js';

export class InputThrottle {
  private seq = 0;
  private pendingMm: number | null = null;
  private readonly now: () => number;

  constructor(now: () => number = () => performance.now()) {
    this.now = now;
  }

  /** Record the latest pointer sample; cheap, called at device rate. */
  pointer(pointerPx: number, canvasCenterPx: number): void {
    this.pendingMm = pointerToHandleMm(pointerPx, canvasCenterPx);
  }

  /** Called once per animation frame: emits the newest sample, if any. */
  flush(): InputMsg | null {
    if (this.pendingMm === null) return null;
    const msg = makeInput(this.seq, this.now(), this.pendingMm);
    this.seq += 1;
    this.pendingMm = null;
    return msg;
  }
}
