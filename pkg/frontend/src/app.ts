import { ApiClient } from './api';
import { labelForKey } from './keyboard';
import { ReviewSession } from './queue';
import { PairView, QuestionView } from './render';
import { LabelStats } from './types';

const LABEL_ORDER = ['1', '1a', '2', '3'] as const;

function questionHtml(view: QuestionView): string {
  const options = view.options.map((o) => `<li><i>${o}</i></li>`).join('');
  return `
    <p><b>${view.text}</b></p>
    <ul>${options}</ul>
    <p class="meta">${view.provenance} &middot; topic: ${view.topic}</p>`;
}

function renderInto(root: HTMLElement, view: PairView): void {
  const dupe = view.exactDuplicate
    ? '<p class="hint">exact duplicate text</p>'
    : '';
  const model = view.model ? `<p class="meta">model: ${view.model}</p>` : '';
  root.innerHTML = `
    <p class="counter">${view.position} / ${view.total}</p>
    ${dupe}${model}
    <div class="pair">
      <section class="query">${questionHtml(view.query)}</section>
      <section class="candidate">${questionHtml(view.candidate)}</section>
    </div>
    <p class="keys">labels: 1 exact &middot; q equivalent &middot;
      2 sub-concept mismatch &middot; 3 total mismatch</p>`;
}

function renderStats(panel: HTMLElement, stats: LabelStats): void {
  // Shown verbatim from the server response; no client-side arithmetic.
  const cells = LABEL_ORDER.map(
    (label) => `<td>${(stats.distribution[label] ?? 0).toFixed(2)}%</td>`
  ).join('');
  panel.innerHTML = `
    <table>
      <tr>${LABEL_ORDER.map((l) => `<th>${l}</th>`).join('')}</tr>
      <tr>${cells}</tr>
    </table>
    <p>${stats.total} annotations stored</p>`;
}

export async function mount(root: HTMLElement, panel: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const session = new ReviewSession(new ApiClient(), {
    runId: params.get('run') ?? '',
    n: Number(params.get('n') ?? '203'),
    seed: Number(params.get('seed') ?? '0'),
    annotator: params.get('annotator') ?? 'anonymous',
    revealModel: params.get('reveal') === '1',
  });
  await session.start();

  const refresh = (stats?: LabelStats): void => {
    const view = session.current();
    if (view) {
      renderInto(root, view);
    } else {
      root.innerHTML = '<p>review complete</p>';
    }
    if (stats) {
      renderStats(panel, stats);
    }
  };

  window.addEventListener('keydown', (event) => {
    const label = labelForKey(event.key);
    if (!label || session.done) {
      return;
    }
    session
      .submit(label)
      .then((stats) => refresh(stats))
      .catch((err: Error) => {
        const notice = document.createElement('p');
        notice.className = 'error';
        notice.textContent = err.message;
        root.prepend(notice);
      });
  });

  refresh(await session.stats());
}
