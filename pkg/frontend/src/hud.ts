// Live-loop statistics for on-screen verification: rendered fps over a
// sliding window and the offset between the server's simulation clock and
// the local wall clock (spread = pacing drift as seen by this client).

export class FpsMeter {
  private stamps: number[] = [];

  tick(nowMs: number): void {
    this.stamps.push(nowMs);
    const cutoff = nowMs - 1000;
    while (this.stamps.length && this.stamps[0] < cutoff) {
      this.stamps.shift();
    }
  }

  get fps(): number {
    return this.stamps.length;
  }
}

export class DriftMeter {
  private offsetMin = Number.POSITIVE_INFINITY;
  private offsetMax = Number.NEGATIVE_INFINITY;

  observe(frameTMs: number, recvMs: number): void {
    const offset = recvMs - frameTMs; // constant when the server holds 1 kHz
    if (offset < this.offsetMin) this.offsetMin = offset;
    if (offset > this.offsetMax) this.offsetMax = offset;
  }

  /** Spread of the clock offset, ms; includes network jitter. */
  get spreadMs(): number {
    if (this.offsetMax < this.offsetMin) return 0;
    return this.offsetMax - this.offsetMin;
  }
}
