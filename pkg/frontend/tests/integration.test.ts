// Parity with the engine through the real service: a scripted 19-point
// sweep must produce exactly the numbers the CLI follow command printed
// for the same frames, and the oscillator must receive tone_hz verbatim.
//
// Spawns the staging script and server; needs the python package installed.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { ToneOutput } from "../src/audio.js";
import { ExplorerSession } from "../src/session.js";
import { headingGuess, samplesToCsv } from "../src/state.js";

const PYTHON = process.env.PYTHON ?? "python3";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as { port: number }).port;
      srv.close(() => resolve(port));
    });
    srv.on("error", reject);
  });
}

async function waitForServer(base: string): Promise<void> {
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      const resp = await fetch(`${base}/routes`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((r) => setTimeout(r, 250));
  }
}

describe("explorer parity with the CLI through the live service", () => {
  let workdir: string;
  let server: ChildProcess | null = null;
  let base: string;

  beforeAll(async () => {
    workdir = mkdtempSync(join(tmpdir(), "explorer-parity-"));
    const staged = spawnSync(
      PYTHON,
      [join(__dirname, "stage_parity.py"), workdir],
      { encoding: "utf-8" },
    );
    if (staged.status !== 0) {
      throw new Error(`staging failed:\n${staged.stdout}\n${staged.stderr}`);
    }
    const port = await freePort();
    base = `http://127.0.0.1:${port}`;
    server = spawn(
      PYTHON,
      ["-m", "viderex.cli", "serve", "--port", String(port),
       "--store", join(workdir, "store")],
      { stdio: "ignore" },
    );
    await waitForServer(base);
  }, 120_000);

  afterAll(() => {
    server?.kill();
    rmSync(workdir, { recursive: true, force: true });
  });

  it("reproduces the follow CSV number-for-number over 19 pans", async () => {
    const applied: number[] = [];
    const tone = new ToneOutput(() => ({
      currentTime: 0,
      destination: {} as AudioNode,
      createOscillator: () =>
        ({
          type: "sine",
          frequency: { setValueAtTime: (v: number) => applied.push(v) },
          connect: () => undefined,
          start: () => undefined,
        }) as unknown as OscillatorNode,
      createGain: () =>
        ({ gain: { value: 1 }, connect: () => undefined }) as unknown as GainNode,
      resume: async () => undefined,
      suspend: async () => undefined,
    }) as never);
    await tone.enable();

    const client = new ServiceClient(base);
    const session = new ExplorerSession(client, {
      onUpdate: (_angle, update) => tone.setFrequency(update.tone_hz),
    });
    await session.load("demo", "sweep19");
    expect(session.state.frameCount).toBe(19);

    for (let k = 0; k < 19; k++) {
      await session.panTo(k);
    }
    expect(session.state.samples.length).toBe(19);

    const expected = readFileSync(join(workdir, "expected.csv"), "utf-8")
      .trim()
      .split("\n");
    const got = samplesToCsv(session.state).trim().split("\n");
    expect(got.length).toBe(expected.length);
    expect(got[0]).toBe(expected[0]);

    for (let row = 1; row <= 19; row++) {
      const want = expected[row].split(",");
      const have = got[row].split(",");
      expect(Number(have[0])).toBe(Number(want[0])); // frame_seq
      expect(Number(have[1])).toBe(Number(want[1])); // angle label
      expect(Number(have[2])).toBe(Number(want[2])); // best_index
      expect(Number(have[3])).toBe(Number(want[3])); // diff, exact
      expect(Number(have[4])).toBe(Number(want[4])); // tone_hz, exact
      expect(have[5]).toBe(want[5]); // haptic
    }

    // trailer: same heading estimate
    const wantGuess = Number(expected.at(-1)!.split("=")[1]);
    expect(headingGuess(session.state)).toBe(wantGuess);

    // the oscillator received exactly the served tone values, in order
    expect(applied).toEqual(session.state.samples.map((s) => s.tone_hz));
  }, 120_000);

  it("recovers transparently when the server expires the session", async () => {
    const client = new ServiceClient(base);
    const session = new ExplorerSession(client);
    await session.load("demo", "sweep19");
    await session.panTo(3);
    // delete the session behind the explorer's back: next pan must
    // recreate and continue without replaying
    await client.closeSession((session as never as { sessionId: string }).sessionId);
    await session.panTo(5);
    expect(session.state.samples.length).toBe(2);
    expect(session.state.samples[1].angle).toBe(5);
  }, 60_000);
});
