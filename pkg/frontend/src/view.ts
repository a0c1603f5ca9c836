// DOM rendering for the annotation screen. No framework: one render
// function repaints the whole view from session state.

import type { SessionState } from './session.js';

const SCALE: Array<{ key: string; value: number; label: string }> = [
  { key: '1', value: -2, label: 'strongly weakens' },
  { key: '2', value: -1, label: 'weakens' },
  { key: '3', value: 0, label: 'no effect' },
  { key: '4', value: 1, label: 'strengthens' },
  { key: '5', value: 2, label: 'strongly strengthens' },
];

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function render(root: HTMLElement, state: SessionState, annotator: string): void {
  if (state.phase === 'loading') {
    root.innerHTML = '<main class="screen"><p class="status">Loading…</p></main>';
    return;
  }
  if (state.phase === 'done' || state.item === null) {
    root.innerHTML = `
      <main class="screen">
        <h1>All done</h1>
        <p class="status">No atoms left in the queue for <b>${escapeHtml(annotator)}</b>.
        Submitted ${state.submitted}, skipped ${state.skipped}.</p>
      </main>`;
    return;
  }
  const item = state.item;
  const decision = state.decision;
  const scaleButtons = SCALE.map((entry) => {
    const selected = decision.valid && decision.effect === entry.value;
    const disabled = !decision.valid;
    return `<button class="scale${selected ? ' selected' : ''}" data-key="${entry.key}"
      ${disabled ? 'disabled' : ''} aria-pressed="${selected}">
      <span class="keycap">${entry.key}</span>
      <span class="value">${entry.value > 0 ? '+' : ''}${entry.value}</span>
      <span class="label">${entry.label}</span>
    </button>`;
  }).join('');

  root.innerHTML = `
    <main class="screen">
      <header class="bar">
        <span>annotator <b>${escapeHtml(annotator)}</b></span>
        <span class="progress">${item.remaining} atoms remaining</span>
      </header>
      ${state.banner ? `<div class="banner" role="alert">${escapeHtml(state.banner)}</div>` : ''}
      <section class="context">
        <div class="field"><span class="tag">premise</span>
          <p>${escapeHtml(item.premise)}</p></div>
        <div class="field"><span class="tag">hypothesis</span>
          <p>${escapeHtml(item.hypothesis)}</p>
          <p class="atom" data-atom-id="${escapeHtml(item.atom_id)}">${escapeHtml(item.atom_text)}</p>
        </div>
        <div class="field"><span class="tag">update</span>
          <p>${escapeHtml(item.update)}</p></div>
      </section>
      <section class="controls">
        <button class="validity${decision.valid ? '' : ' invalid'}" data-key="v"
          aria-pressed="${!decision.valid}">
          <span class="keycap">V</span>
          ${decision.valid ? 'valid atom' : 'marked invalid'}
        </button>
        <div class="scale-row">${scaleButtons}</div>
        <p class="hint">1–5 picks the effect, V toggles validity, Enter submits.</p>
      </section>
      <details class="instructions"><summary>Annotation guide</summary>
        <pre>${escapeHtml(item.instructions)}</pre></details>
    </main>`;
}

export function bindClicks(root: HTMLElement, onKey: (key: string) => void): void {
  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest('[data-key]');
    if (target instanceof HTMLElement && target.dataset.key) {
      onKey(target.dataset.key);
    }
  });
}
