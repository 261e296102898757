// Pan orchestration: at most one frame submission in flight; while one is
// pending, newer pan targets overwrite each other (latest wins). A stale
// session (server expired it) is recreated transparently without
// replaying anything; network failures surface through a banner callback
// and never wedge the queue.

import { ApiError, ServiceClient, type FamiliarityUpdate } from "./api.js";
import {
  appendSample,
  clampAngle,
  initialState,
  nearestFrameIndex,
  type ExplorerState,
} from "./state.js";

export interface ExplorerHooks {
  onState?: (state: ExplorerState) => void;
  onUpdate?: (angle: number, update: FamiliarityUpdate) => void;
  onBanner?: (message: string | null) => void;
}

export class ExplorerSession {
  state: ExplorerState = initialState();
  private sessionId: string | null = null;
  private frames = new Map<number, ArrayBuffer>();
  private drainPromise: Promise<void> | null = null;
  private queuedAngle: number | null = null;

  constructor(
    private client: ServiceClient,
    private hooks: ExplorerHooks = {},
  ) {}

  async load(routeName: string, sweepRouteName: string): Promise<void> {
    const manifest = await this.client.getManifest(sweepRouteName);
    const handle = await this.client.createSession(routeName);
    this.sessionId = handle.session_id;
    this.frames.clear();
    this.state = {
      ...initialState(),
      routeName,
      sweepRouteName,
      frameCount: manifest.frame_files.length,
    };
    this.hooks.onState?.(this.state);
  }

  private async frameAt(index: number): Promise<ArrayBuffer> {
    const cached = this.frames.get(index);
    if (cached) return cached;
    const blob = await this.client.getFrame(this.state.sweepRouteName!, index);
    this.frames.set(index, blob);
    return blob;
  }

  panTo(angle: number): Promise<void> {
    this.queuedAngle = clampAngle(this.state, angle);
    if (!this.drainPromise) {
      this.drainPromise = this.drain().finally(() => {
        this.drainPromise = null;
      });
    }
    return this.drainPromise;
  }

  private async drain(): Promise<void> {
    while (this.queuedAngle !== null) {
      const angle = this.queuedAngle;
      this.queuedAngle = null;
      await this.submitAngle(angle);
    }
  }

  private async submitAngle(angle: number): Promise<void> {
    const index = nearestFrameIndex(this.state, angle);
    let update: FamiliarityUpdate;
    try {
      const frame = await this.frameAt(index);
      update = await this.submitWithRecreate(frame);
    } catch (err) {
      this.hooks.onBanner?.(
        `submission failed: ${err instanceof Error ? err.message : err}`,
      );
      return;
    }
    this.hooks.onBanner?.(null);
    this.state = appendSample({ ...this.state, panAngle: angle }, angle, update);
    this.hooks.onUpdate?.(angle, update);
    this.hooks.onState?.(this.state);
  }

  private async submitWithRecreate(frame: ArrayBuffer): Promise<FamiliarityUpdate> {
    try {
      return await this.client.submitFrame(this.sessionId!, frame);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404 && this.state.routeName) {
        const handle = await this.client.createSession(this.state.routeName);
        this.sessionId = handle.session_id;
        return this.client.submitFrame(this.sessionId, frame);
      }
      throw err;
    }
  }

  async close(): Promise<void> {
    if (this.sessionId) {
      await this.client.closeSession(this.sessionId);
      this.sessionId = null;
    }
  }
}
