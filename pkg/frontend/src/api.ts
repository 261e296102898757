// Typed client for the navigation service. The explorer performs no
// matching of its own: every number it shows came over this wire.

export interface RouteEntry {
  name: string;
  created_at: string;
  frame_count: number;
}

export interface RouteManifest {
  name: string;
  created_at: string;
  frame_files: string[];
  params: {
    working_width: number;
    working_height: number;
    fov_deg: number;
    stride: number;
  };
  checksum: string;
}

export interface SessionHandle {
  session_id: string;
  route_name: string;
  created_at: string;
}

export interface FamiliarityUpdate {
  frame_seq: number;
  best_index: number;
  diff: number;
  tone_hz: number;
  haptic: boolean;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    throw new ApiError(resp.status, `${resp.status} ${await resp.text()}`);
  }
  return resp.json() as Promise<T>;
}

export class ServiceClient {
  constructor(private base: string) {
    this.base = base.replace(/\/$/, "");
  }

  listRoutes(): Promise<RouteEntry[]> {
    return fetch(`${this.base}/routes`).then((r) => expectJson<RouteEntry[]>(r));
  }

  getManifest(name: string): Promise<RouteManifest> {
    return fetch(`${this.base}/routes/${name}`).then((r) =>
      expectJson<RouteManifest>(r),
    );
  }

  async getFrame(name: string, index: number): Promise<ArrayBuffer> {
    const resp = await fetch(`${this.base}/routes/${name}/frames/${index}`);
    if (!resp.ok) {
      throw new ApiError(resp.status, `frame ${index} of ${name}: ${resp.status}`);
    }
    return resp.arrayBuffer();
  }

  createSession(routeName: string, calibration: "fixed" | "running" = "fixed"):
      Promise<SessionHandle> {
    return fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ route_name: routeName, calibration }),
    }).then((r) => expectJson<SessionHandle>(r));
  }

  submitFrame(sessionId: string, frame: ArrayBuffer): Promise<FamiliarityUpdate> {
    return fetch(`${this.base}/sessions/${sessionId}/frames`, {
      method: "POST",
      headers: { "Content-Type": "image/x-portable-graymap" },
      body: frame,
    }).then((r) => expectJson<FamiliarityUpdate>(r));
  }

  async closeSession(sessionId: string): Promise<void> {
    await fetch(`${this.base}/sessions/${sessionId}`, { method: "DELETE" });
  }
}
