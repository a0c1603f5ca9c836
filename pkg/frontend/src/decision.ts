// Pure decision state for one atom: which keys do what, and when a
// submission is allowed. Keyboard-first: thousands of atoms means every
// decision is a couple of keypresses.
//
//   1..5   effect -2..+2 (only while the atom is marked valid)
//   V      toggle validity; marking invalid clears the effect
//   Enter  submit (handled by the session; see recordFor)

import type { AnnotationRecord, QueueItem } from './types.js';

export interface Decision {
  valid: boolean;
  effect: number | null;
}

// Atoms start valid: the overwhelming majority survive review, so the
// common path is a single digit plus Enter.
export function freshDecision(): Decision {
  return { valid: true, effect: null };
}

const KEY_TO_EFFECT: Record<string, number> = {
  '1': -2,
  '2': -1,
  '3': 0,
  '4': 1,
  '5': 2,
};

export function applyKey(decision: Decision, key: string): Decision {
  if (key === 'v' || key === 'V') {
    return decision.valid
      ? { valid: false, effect: null }
      : { valid: true, effect: null };
  }
  const effect = KEY_TO_EFFECT[key];
  if (effect !== undefined && decision.valid) {
    return { ...decision, effect };
  }
  return decision;
}

// A submittable record, or null while the decision is incomplete
// (valid atoms must carry an effect before Enter does anything).
export function recordFor(
  item: QueueItem,
  annotator: string,
  decision: Decision,
  now: () => string = () => new Date().toISOString().replace(/\.\d{3}Z$/, 'Z'),
): AnnotationRecord | null {
  if (decision.valid && decision.effect === null) {
    return null;
  }
  return {
    atom_id: item.atom_id,
    annotator_id: annotator,
    valid: decision.valid,
    effect: decision.valid ? decision.effect : null,
    timestamp: now(),
  };
}

export function idempotencyToken(atomId: string, annotator: string): string {
  return `${atomId}:${annotator}`;
}
