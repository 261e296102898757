import { describe, expect, it } from "vitest";

import { ToneOutput } from "../src/audio.js";

function fakeContext() {
  const applied: number[] = [];
  let state = "suspended";
  const osc = {
    type: "sine",
    frequency: {
      setValueAtTime: (value: number) => applied.push(value),
    },
    connect: () => undefined,
    start: () => undefined,
  };
  const ctx = {
    currentTime: 0,
    destination: {} as AudioNode,
    createOscillator: () => osc as unknown as OscillatorNode,
    createGain: () =>
      ({ gain: { value: 1 }, connect: () => undefined }) as unknown as GainNode,
    resume: async () => {
      state = "running";
    },
    suspend: async () => {
      state = "suspended";
    },
  };
  return { ctx, applied, state: () => state };
}

describe("ToneOutput", () => {
  it("passes tone_hz through to the oscillator exactly", async () => {
    const { ctx, applied } = fakeContext();
    const tone = new ToneOutput(() => ctx as never);
    await tone.enable();
    const values = [200.0, 1234.5678901234567, 2000.0, 0.1 + 0.2];
    for (const v of values) tone.setFrequency(v);
    expect(applied).toEqual(values);
  });

  it("creates no audio context until enabled, then applies the last tone", async () => {
    const { ctx, applied } = fakeContext();
    const tone = new ToneOutput(() => ctx as never);
    tone.setFrequency(555.5);
    expect(applied).toEqual([]);
    await tone.enable();
    expect(applied).toEqual([555.5]);
  });

  it("suspends on disable and resumes on enable", async () => {
    const { ctx, state } = fakeContext();
    const tone = new ToneOutput(() => ctx as never);
    await tone.enable();
    expect(state()).toBe("running");
    await tone.disable();
    expect(state()).toBe("suspended");
  });
});
