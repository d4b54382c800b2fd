import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { ReviewSession } from '../src/queue';
import { FakeAnnotationBackend, fakeFetch, question } from './helpers';

function backendRoutes(backend: FakeAnnotationBackend, pairCount = 3) {
  const pairs = Array.from({ length: pairCount }, (_, i) => ({
    query_id: `q${i}`,
    candidate_id: `c${i}`,
  }));
  return {
    pairs,
    routes: [
      [
        '/api/sample',
        () => ({
          status: 200,
          body: { run_id: 'run-1', n: pairCount, seed: 7, pairs },
        }),
      ],
      [
        '/api/questions/',
        (url: string) => ({
          status: 200,
          body: question(url.split('/').pop() as string),
        }),
      ],
      [
        '/api/annotations/stats',
        () => backend.stats(),
      ],
      [
        '/api/annotations',
        (_url: string, init?: RequestInit) => {
          const body = JSON.parse(init?.body as string);
          return backend.submit(body.query_id, body.candidate_id, body.label);
        },
      ],
      [
        '/api/runs',
        () => ({
          status: 200,
          body: [{ run_id: 'run-1', model: 'bm25', mode: 'end_to_end', k: 10, n_queries: 5 }],
        }),
      ],
    ] as Array<[string, (url: string, init?: RequestInit) => { status: number; body: unknown }]>,
  };
}

async function startedSession(
  backend: FakeAnnotationBackend,
  pairCount = 3,
  revealModel = false
) {
  const { routes } = backendRoutes(backend, pairCount);
  const { fetchImpl, requests } = fakeFetch(routes);
  const session = new ReviewSession(new ApiClient('', fetchImpl), {
    runId: 'run-1',
    n: pairCount,
    seed: 7,
    annotator: 'tester',
    revealModel,
  });
  await session.start();
  return { session, requests };
}

describe('ReviewSession', () => {
  it('hydrates the sampled pairs in server order', async () => {
    const { session } = await startedSession(new FakeAnnotationBackend());
    const view = session.current();
    expect(view?.query.id).toBe('q0');
    expect(view?.candidate.id).toBe('c0');
    expect(view?.position).toBe(1);
    expect(view?.total).toBe(3);
  });

  it('advances on successful submit and finishes the queue', async () => {
    const { session } = await startedSession(new FakeAnnotationBackend());
    await session.submit('1');
    expect(session.current()?.query.id).toBe('q1');
    await session.submit('2');
    await session.submit('3');
    expect(session.done).toBe(true);
    expect(session.current()).toBeNull();
  });

  it('progress counter equals stored annotation count', async () => {
    const backend = new FakeAnnotationBackend();
    const { session } = await startedSession(backend);
    await session.submit('1');
    const stats = await session.submit('1a');
    expect(session.progress).toEqual({ labelled: 2, total: 3 });
    expect(stats.total).toBe(2);
  });

  it('stats panel equals the server response exactly', async () => {
    const backend = new FakeAnnotationBackend();
    const { session } = await startedSession(backend);
    await session.submit('1');
    await session.submit('1');
    const fromSubmit = await session.submit('2');
    const fromServer = await session.stats();
    expect(fromSubmit).toEqual(fromServer);
    const sum = Object.values(fromServer.distribution).reduce((a, b) => a + b, 0);
    expect(Math.abs(sum - 100)).toBeLessThanOrEqual(0.01);
  });

  it('skips forward on a duplicate without double-counting', async () => {
    const backend = new FakeAnnotationBackend();
    backend.submit('q1', 'c1', '2'); // pre-stored by an earlier session
    const { session } = await startedSession(backend);
    await session.submit('1');
    await session.submit('3'); // duplicate for q1/c1
    expect(session.progress.labelled).toBe(1);
    expect(session.current()?.query.id).toBe('q2');
  });

  it('does not advance when the server rejects the label', async () => {
    const { routes } = backendRoutes(new FakeAnnotationBackend());
    routes[3] = [
      '/api/annotations',
      () => ({ status: 422, body: { code: 'InvalidLabel', message: 'bad label' } }),
    ];
    const { fetchImpl } = fakeFetch(routes);
    const session = new ReviewSession(new ApiClient('', fetchImpl), {
      runId: 'run-1',
      n: 3,
      seed: 7,
      annotator: 'tester',
    });
    await session.start();
    await expect(session.submit('1')).rejects.toThrowError('bad label');
    expect(session.current()?.query.id).toBe('q0');
    expect(session.progress.labelled).toBe(0);
  });

  it('is blind by default and reveals the model on request', async () => {
    const blind = await startedSession(new FakeAnnotationBackend());
    expect(blind.session.current()?.model).toBeNull();
    const open = await startedSession(new FakeAnnotationBackend(), 3, true);
    expect(open.session.current()?.model).toBe('bm25');
  });

  it('sends the annotator with every submission', async () => {
    const backend = new FakeAnnotationBackend();
    const { session, requests } = await startedSession(backend);
    await session.submit('1');
    const post = requests.find((r) => r.method === 'POST');
    expect(post?.body).toMatchObject({ annotator: 'tester', run_id: 'run-1' });
  });
});
