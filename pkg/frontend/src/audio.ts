/** Success / failure tones.  Audio is the only failure feedback: a
 * missed click must never reveal the blurred target's position
 * visually, so there is deliberately no flash or highlight on errors. */

export class TonePlayer {
  private ctx: AudioContext | null = null;

  constructor(private readonly enabled: boolean) {}

  private context(): AudioContext {
    if (this.ctx === null) {
      this.ctx = new AudioContext();
    }
    return this.ctx;
  }

  private beep(freq: number, durationMs: number): void {
    if (!this.enabled) return;
    const ctx = this.context();
    const osc = ctx.createOscillator();
    const gain = ctx.createGain();
    osc.frequency.value = freq;
    osc.type = "sine";
    gain.gain.setValueAtTime(0.15, ctx.currentTime);
    gain.gain.exponentialRampToValueAtTime(1e-4, ctx.currentTime + durationMs / 1000);
    osc.connect(gain).connect(ctx.destination);
    osc.start();
    osc.stop(ctx.currentTime + durationMs / 1000);
  }

  success(): void {
    this.beep(880, 90);
  }

  failure(): void {
    this.beep(220, 150);
  }
}
