import { describe, expect, it } from "vitest";

import { ApiError, type FamiliarityUpdate } from "../src/api.js";
import { ExplorerSession } from "../src/session.js";

type Deferred = { resolve: (u: FamiliarityUpdate) => void; reject: (e: Error) => void };

// hand-rolled service double: frames resolve instantly, submissions are
// resolved by the test when it chooses.
class FakeClient {
  submitted: number[] = [];
  sessionsCreated = 0;
  pending: Deferred[] = [];
  autoRespond = true;
  failNextSubmitWith: Error | null = null;
  private seq = 0;

  async getManifest(name: string) {
    return {
      name,
      created_at: "",
      frame_files: Array.from({ length: 19 }, (_, i) => `frames/frame_${i}.pgm`),
      params: { working_width: 90, working_height: 25, fov_deg: 90, stride: 1 },
      checksum: "",
    };
  }

  async createSession() {
    this.sessionsCreated += 1;
    return { session_id: `s${this.sessionsCreated}`, route_name: "r", created_at: "" };
  }

  async getFrame(_name: string, index: number): Promise<ArrayBuffer> {
    return new Uint8Array([index]).buffer;
  }

  submitFrame(_sid: string, frame: ArrayBuffer): Promise<FamiliarityUpdate> {
    const index = new Uint8Array(frame)[0];
    if (this.failNextSubmitWith) {
      const err = this.failNextSubmitWith;
      this.failNextSubmitWith = null;
      return Promise.reject(err);
    }
    this.submitted.push(index);
    const update: FamiliarityUpdate = {
      frame_seq: this.seq++,
      best_index: index,
      diff: index / 100,
      tone_hz: 2000 - index,
      haptic: index === 0,
    };
    if (this.autoRespond) return Promise.resolve(update);
    return new Promise((resolve, reject) => this.pending.push({ resolve, reject }));
  }

  async closeSession() {}
}

async function loadedSession(hooks = {}) {
  const client = new FakeClient();
  const session = new ExplorerSession(client as never, hooks);
  await session.load("r", "sweep");
  return { client, session };
}

describe("ExplorerSession", () => {
  it("appends the returned update per pan", async () => {
    const updates: FamiliarityUpdate[] = [];
    const { session } = await loadedSession({
      onUpdate: (_a: number, u: FamiliarityUpdate) => updates.push(u),
    });
    await session.panTo(3);
    await session.panTo(5);
    expect(session.state.samples.length).toBe(2);
    expect(updates.map((u) => u.frame_seq)).toEqual([0, 1]);
    // samples are a bijection with updates: same values, no reshaping
    expect(session.state.samples.map((s) => s.diff)).toEqual(
      updates.map((u) => u.diff),
    );
    expect(session.state.samples.map((s) => s.tone_hz)).toEqual(
      updates.map((u) => u.tone_hz),
    );
  });

  it("coalesces queued pans, latest wins", async () => {
    const flush = () => new Promise((r) => setTimeout(r, 0));
    const { client, session } = await loadedSession();
    client.autoRespond = false;
    const first = session.panTo(0);
    void session.panTo(4);
    void session.panTo(9);
    const done = session.panTo(13);
    await flush();
    // only the first submission is in flight; resolve it
    client.pending.shift()!.resolve({
      frame_seq: 0, best_index: 0, diff: 0, tone_hz: 2000, haptic: true,
    });
    await flush();
    // the queue collapsed to the latest target
    client.pending.shift()!.resolve({
      frame_seq: 1, best_index: 13, diff: 0.13, tone_hz: 1987, haptic: false,
    });
    await first;
    await done;
    expect(client.submitted).toEqual([0, 13]);
    expect(session.state.samples.map((s) => s.angle)).toEqual([0, 13]);
  });

  it("recreates a stale session and replays nothing", async () => {
    const { client, session } = await loadedSession();
    await session.panTo(2);
    client.failNextSubmitWith = new ApiError(404, "unknown session");
    await session.panTo(7);
    expect(client.sessionsCreated).toBe(2);
    // no replay: exactly one successful submission per pan
    expect(client.submitted).toEqual([2, 7]);
    expect(session.state.samples.length).toBe(2);
  });

  it("shows a banner on network failure and clears it on recovery", async () => {
    const banners: (string | null)[] = [];
    const { client, session } = await loadedSession({
      onBanner: (m: string | null) => banners.push(m),
    });
    client.failNextSubmitWith = new TypeError("fetch failed");
    await session.panTo(1);
    expect(banners.at(-1)).toContain("fetch failed");
    expect(session.state.samples.length).toBe(0);
    await session.panTo(1);
    expect(banners.at(-1)).toBeNull();
    expect(session.state.samples.length).toBe(1);
  });

  it("clamps pans to the sweep arc", async () => {
    const { client, session } = await loadedSession();
    await session.panTo(500);
    expect(client.submitted).toEqual([18]);
  });
});
