import { describe, expect, it } from 'vitest';

import type { ApiClient } from './api.js';
import { ApiError } from './api.js';
import { AnnotationSession } from './session.js';
import type { AnnotationRecord, ProgressInfo, QueueItem, QueueResponse } from './types.js';

function fixtureAtom(index: number): QueueItem {
  return {
    done: false,
    atom_id: `atom-${index}`,
    atom_text: `Atom number ${index}.`,
    example_id: `ex-${index}`,
    premise: 'A premise sentence.',
    hypothesis: 'A hypothesis sentence.',
    update: 'An update sentence.',
    instructions: 'scale',
    remaining: 5 - index,
  };
}

// In-memory stand-in for the annotation service: single-annotator queue
// semantics (an atom leaves the queue once anyone labels it), plus knobs
// for latency and failure injection.
class FakeApi implements ApiClient {
  posts: AnnotationRecord[] = [];
  stored = new Map<string, AnnotationRecord>();
  failNextSubmits = 0;
  private gate: Promise<void> | null = null;
  private openGate: (() => void) | null = null;

  constructor(private atoms: QueueItem[]) {}

  holdSubmissions(): void {
    this.gate = new Promise((resolve) => {
      this.openGate = resolve;
    });
  }

  releaseSubmissions(): void {
    this.openGate?.();
    this.gate = null;
    this.openGate = null;
  }

  async queueNext(annotator: string): Promise<QueueResponse> {
    const next = this.atoms.find((a) => !this.stored.has(`${a.atom_id}`));
    if (!next) {
      return { done: true, remaining: 0 };
    }
    return { ...next };
  }

  async submitLabel(record: AnnotationRecord): Promise<AnnotationRecord> {
    if (this.gate) {
      await this.gate;
    }
    if (this.failNextSubmits > 0) {
      this.failNextSubmits -= 1;
      throw new ApiError('network failure: connection refused', 0);
    }
    if (!this.atoms.some((a) => a.atom_id === record.atom_id)) {
      throw new ApiError('unknown atom', 404);
    }
    this.posts.push(record);
    this.stored.set(record.atom_id, record);
    return record;
  }

  async progress(): Promise<ProgressInfo> {
    return {
      total_atoms: this.atoms.length,
      labeled_atoms: this.stored.size,
      remaining_atoms: this.atoms.length - this.stored.size,
      records: this.stored.size,
      by_annotator: {},
    };
  }
}

const fixedClock = () => '2025-06-02T10:00:00Z';

describe('scripted annotation session', () => {
  it('labels five fixture atoms; export equals the keyed inputs', async () => {
    const api = new FakeApi([1, 2, 3, 4, 5].map(fixtureAtom));
    const session = new AnnotationSession(api, 'a1', fixedClock);
    await session.start();

    // keyed script: +2, -2, invalid, 0, +1
    const script: string[][] = [
      ['5', 'Enter'],
      ['1', 'Enter'],
      ['v', 'Enter'],
      ['3', 'Enter'],
      ['4', 'Enter'],
    ];
    for (const keys of script) {
      for (const key of keys) {
        await session.handleKey(key);
      }
    }
    expect(session.state.phase).toBe('done');
    expect(api.posts).toHaveLength(5);

    const expected: AnnotationRecord[] = [
      { atom_id: 'atom-1', annotator_id: 'a1', valid: true, effect: 2, timestamp: fixedClock() },
      { atom_id: 'atom-2', annotator_id: 'a1', valid: true, effect: -2, timestamp: fixedClock() },
      { atom_id: 'atom-3', annotator_id: 'a1', valid: false, effect: null, timestamp: fixedClock() },
      { atom_id: 'atom-4', annotator_id: 'a1', valid: true, effect: 0, timestamp: fixedClock() },
      { atom_id: 'atom-5', annotator_id: 'a1', valid: true, effect: 1, timestamp: fixedClock() },
    ];
    expect([...api.stored.values()]).toEqual(expected);
  });

  it('rapid double Enter produces exactly one stored record', async () => {
    const api = new FakeApi([fixtureAtom(1)]);
    const session = new AnnotationSession(api, 'a1', fixedClock);
    await session.start();
    await session.handleKey('5');

    api.holdSubmissions();
    const first = session.handleKey('Enter');
    const second = session.handleKey('Enter'); // fires while the first is in flight
    api.releaseSubmissions();
    const outcomes = await Promise.all([first, second]);

    expect(outcomes.sort()).toEqual(['duplicate', 'submitted']);
    expect(api.posts).toHaveLength(1);
    expect(api.stored.size).toBe(1);
  });

  it('valid without effect is never submitted', async () => {
    const api = new FakeApi([fixtureAtom(1)]);
    const session = new AnnotationSession(api, 'a1', fixedClock);
    await session.start();
    expect(await session.handleKey('Enter')).toBe('incomplete');
    expect(api.posts).toHaveLength(0);
    expect(session.state.banner).toContain('Pick an effect');
  });

  it('network failure keeps the record locally and retries on Enter', async () => {
    const api = new FakeApi([fixtureAtom(1)]);
    api.failNextSubmits = 1;
    const session = new AnnotationSession(api, 'a1', fixedClock);
    await session.start();
    await session.handleKey('2');

    expect(await session.handleKey('Enter')).toBe('retry-queued');
    expect(session.state.banner).toContain('retry');
    expect(api.stored.size).toBe(0);

    expect(await session.handleKey('Enter')).toBe('submitted');
    expect(api.stored.get('atom-1')?.effect).toBe(-1);
    expect(api.posts).toHaveLength(1);
  });

  it('a stale atom (404) is skipped with a visible notice', async () => {
    const atoms = [fixtureAtom(1), fixtureAtom(2)];
    const api = new FakeApi(atoms);
    const session = new AnnotationSession(api, 'a1', fixedClock);
    await session.start();
    // the served atom disappears server-side before submission
    atoms.shift();
    await session.handleKey('5');
    expect(await session.handleKey('Enter')).toBe('skipped-stale');
    expect(session.state.skipped).toBe(1);
    expect(session.state.item?.atom_id).toBe('atom-2');
  });

  it('keys are inert between items and after the queue drains', async () => {
    const api = new FakeApi([fixtureAtom(1)]);
    const session = new AnnotationSession(api, 'a1', fixedClock);
    await session.start();
    await session.handleKey('3');
    await session.handleKey('Enter');
    expect(session.state.phase).toBe('done');
    expect(await session.handleKey('5')).toBe('ignored');
    expect(await session.handleKey('Enter')).toBe('ignored');
  });
});
