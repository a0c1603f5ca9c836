// One annotator's pass over the queue: fetch an atom, collect a decision,
// submit exactly once, advance. Survives network failures without data
// loss: the pending record stays local until the server acknowledges it.

import type { ApiClient } from './api.js';
import { ApiError } from './api.js';
import type { AnnotationRecord, QueueItem } from './types.js';
import {
  Decision,
  applyKey,
  freshDecision,
  idempotencyToken,
  recordFor,
} from './decision.js';

export type SessionPhase = 'loading' | 'annotating' | 'done';

export interface SessionState {
  phase: SessionPhase;
  item: QueueItem | null;
  decision: Decision;
  banner: string | null;
  submitted: number;
  skipped: number;
}

export type KeyOutcome =
  | 'updated'
  | 'submitted'
  | 'incomplete'
  | 'duplicate'
  | 'retry-queued'
  | 'skipped-stale'
  | 'ignored';

export class AnnotationSession {
  readonly state: SessionState = {
    phase: 'loading',
    item: null,
    decision: freshDecision(),
    banner: null,
    submitted: 0,
    skipped: 0,
  };

  private inFlight: string | null = null;
  private acknowledged = new Set<string>();
  private pending: AnnotationRecord | null = null;
  private listeners: Array<(state: SessionState) => void> = [];

  constructor(
    private readonly api: ApiClient,
    readonly annotator: string,
    private readonly now?: () => string,
  ) {}

  onChange(listener: (state: SessionState) => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async start(): Promise<void> {
    await this.advance();
  }

  private async advance(): Promise<void> {
    this.state.phase = 'loading';
    this.notify();
    const next = await this.api.queueNext(this.annotator);
    if (next.done) {
      this.state.phase = 'done';
      this.state.item = null;
    } else {
      this.state.phase = 'annotating';
      this.state.item = next;
      this.state.decision = freshDecision();
      this.pending = null;
    }
    this.state.banner = null;
    this.notify();
  }

  async handleKey(key: string): Promise<KeyOutcome> {
    if (this.state.phase !== 'annotating' || this.state.item === null) {
      return 'ignored';
    }
    if (key !== 'Enter') {
      const updated = applyKey(this.state.decision, key);
      if (updated === this.state.decision) {
        return 'ignored';
      }
      this.state.decision = updated;
      this.notify();
      return 'updated';
    }
    return this.submit();
  }

  private async submit(): Promise<KeyOutcome> {
    const item = this.state.item as QueueItem;
    const token = idempotencyToken(item.atom_id, this.annotator);
    if (this.inFlight === token || this.acknowledged.has(token)) {
      return 'duplicate';
    }
    const record =
      this.pending ?? recordFor(item, this.annotator, this.state.decision, this.now);
    if (record === null) {
      this.state.banner = 'Pick an effect (1-5) or mark the atom invalid (V) first.';
      this.notify();
      return 'incomplete';
    }
    this.inFlight = token;
    try {
      await this.api.submitLabel(record);
    } catch (error) {
      this.inFlight = null;
      if (error instanceof ApiError && error.status === 404) {
        // stale queue entry: skip it visibly, nothing to retry
        this.state.banner = `Atom ${record.atom_id} no longer exists; skipped.`;
        this.state.skipped += 1;
        this.pending = null;
        await this.advance();
        return 'skipped-stale';
      }
      this.pending = record;
      this.state.banner = 'Submission failed; your decision is saved locally. Press Enter to retry.';
      this.notify();
      return 'retry-queued';
    }
    this.inFlight = null;
    this.acknowledged.add(token);
    this.pending = null;
    this.state.submitted += 1;
    await this.advance();
    return 'submitted';
  }
}
