import { HttpApiClient } from './api.js';
import { AnnotationSession } from './session.js';
import { bindClicks, render } from './view.js';

function annotatorId(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('annotator');
  if (fromQuery) {
    window.localStorage.setItem('annotator', fromQuery);
    return fromQuery;
  }
  const stored = window.localStorage.getItem('annotator');
  if (stored) {
    return stored;
  }
  const entered = window.prompt('Annotator id:', 'a1') || 'a1';
  window.localStorage.setItem('annotator', entered);
  return entered;
}

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) {
    throw new Error('missing #app mount point');
  }
  const annotator = annotatorId();
  const session = new AnnotationSession(new HttpApiClient(), annotator);
  session.onChange((state) => render(root, state, annotator));

  window.addEventListener('keydown', (event) => {
    if (event.repeat) {
      return; // holding Enter must not fire repeated submissions
    }
    if (['1', '2', '3', '4', '5', 'v', 'V', 'Enter'].includes(event.key)) {
      event.preventDefault();
      void session.handleKey(event.key);
    }
  });
  bindClicks(root, (key) => void session.handleKey(key === 'v' ? 'v' : key));

  await session.start();
}

void boot();
