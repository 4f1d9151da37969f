/**
 * Client-side 1 Hz frame gate: keep the first frame of each second,
 * mirroring the server's buffer thinning so nothing is wasted on the wire.
 */

export class FrameThrottle {
  private lastSecond: number | null = null;
  private lastTs = Number.NEGATIVE_INFINITY;

  /** True when a frame captured at `ts` (seconds) should be sent. */
  shouldSend(ts: number): boolean {
    if (!Number.isFinite(ts) || ts < this.lastTs) {
      return false;
    }
    this.lastTs = ts;
    const second = Math.floor(ts);
    if (this.lastSecond !== null && second === this.lastSecond) {
      return false;
    }
    this.lastSecond = second;
    return true;
  }

  reset(): void {
    this.lastSecond = null;
    this.lastTs = Number.NEGATIVE_INFINITY;
  }
}
