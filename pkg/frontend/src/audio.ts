// One continuous oscillator; its frequency steps to each update's tone_hz
// verbatim. Muted until the user enables audio (browser gesture policy).

type AudioContextLike = Pick<AudioContext, never> & {
  currentTime: number;
  destination: AudioNode;
  createOscillator(): OscillatorNode;
  createGain(): GainNode;
  resume(): Promise<void>;
  suspend(): Promise<void>;
};

export class ToneOutput {
  private ctx: AudioContextLike | null = null;
  private osc: OscillatorNode | null = null;
  private gain: GainNode | null = null;
  lastFrequency: number | null = null;

  constructor(private makeContext: () => AudioContextLike) {}

  async enable(): Promise<void> {
    if (!this.ctx) {
      this.ctx = this.makeContext();
      this.osc = this.ctx.createOscillator();
      this.osc.type = "sine";
      this.gain = this.ctx.createGain();
      this.gain.gain.value = 0.15;
      this.osc.connect(this.gain);
      this.gain.connect(this.ctx.destination);
      this.osc.start();
      if (this.lastFrequency !== null) {
        this.osc.frequency.setValueAtTime(this.lastFrequency, this.ctx.currentTime);
      }
    }
    await this.ctx.resume();
  }

  async disable(): Promise<void> {
    if (this.ctx) {
      await this.ctx.suspend();
    }
  }

  // The engine owns the mapping; the value is applied unchanged.
  setFrequency(toneHz: number): void {
    this.lastFrequency = toneHz;
    if (this.ctx && this.osc) {
      this.osc.frequency.setValueAtTime(toneHz, this.ctx.currentTime);
    }
  }
}
