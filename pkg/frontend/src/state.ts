// Explorer state and the pure functions that evolve it. Samples mirror the
// session's updates one-to-one: no smoothing, no remapping, appended in
// submission order.

import type { FamiliarityUpdate } from "./api.js";

export interface Sample {
  angle: number;
  diff: number;
  tone_hz: number;
  update: FamiliarityUpdate;
}

export interface ExplorerState {
  routeName: string | null;
  sweepRouteName: string | null;
  frameCount: number;
  panAngle: number;
  samples: Sample[];
  audioEnabled: boolean;
  bestIndex: number | null;
}

export function initialState(): ExplorerState {
  return {
    routeName: null,
    sweepRouteName: null,
    frameCount: 0,
    panAngle: 0,
    samples: [],
    audioEnabled: false,
    bestIndex: null,
  };
}

// Frames arriving through the route store carry no angle metadata, so the
// pan axis is frame order: angle k selects frame k, exactly the labelling
// the CLI follow command uses for plain frame sequences.
export function nearestFrameIndex(state: ExplorerState, angle: number): number {
  if (state.frameCount < 1) throw new Error("no sweep loaded");
  const clamped = clampAngle(state, angle);
  return Math.round(clamped);
}

export function clampAngle(state: ExplorerState, angle: number): number {
  return Math.min(Math.max(angle, 0), Math.max(state.frameCount - 1, 0));
}

export function appendSample(
  state: ExplorerState,
  angle: number,
  update: FamiliarityUpdate,
): ExplorerState {
  const sample: Sample = { angle, diff: update.diff, tone_hz: update.tone_hz, update };
  return {
    ...state,
    samples: [...state.samples, sample],
    bestIndex: update.best_index,
  };
}

// Argmin over accumulated samples; ties to the lowest angle. Null when
// nothing has been sampled yet (the overlay stays hidden).
export function headingGuess(state: ExplorerState): number | null {
  if (state.samples.length === 0) return null;
  let bestAngle: number | null = null;
  let bestDiff = Infinity;
  const byAngle = [...state.samples].sort((a, b) => a.angle - b.angle);
  for (const s of byAngle) {
    if (s.diff < bestDiff) {
      bestDiff = s.diff;
      bestAngle = s.angle;
    }
  }
  return bestAngle;
}

// CSV in the exact column layout the CLI follow command prints, so a
// scripted sweep can be diffed against it number-for-number.
export function samplesToCsv(state: ExplorerState): string {
  const lines = ["frame_seq,angle_deg,best_index,diff,tone_hz,haptic"];
  for (const s of state.samples) {
    const u = s.update;
    lines.push(
      `${u.frame_seq},${s.angle},${u.best_index},${u.diff},${u.tone_hz},${u.haptic}`,
    );
  }
  const guess = headingGuess(state);
  if (guess !== null) {
    lines.push(`# heading_estimate_deg=${guess}`);
  }
  return lines.join("\n");
}
