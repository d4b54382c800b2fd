import { FetchLike } from '../src/api';
import { Question } from '../src/types';

export function question(id: string, overrides: Partial<Question> = {}): Question {
  return {
    id,
    questionnaire: 'wave-1',
    study: 'study-a',
    year: 1970,
    text: `Question ${id}?`,
    options: [
      { code: '1', label: 'yes' },
      { code: '2', label: 'no' },
    ],
    typology: 'standard',
    topic_top: 'employment',
    topic_sub: null,
    is_code_list: true,
    ...overrides,
  };
}

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

type Handler = (url: string, init?: RequestInit) => { status: number; body: unknown };

/** In-memory fetch double; routes are matched by prefix, calls recorded. */
export function fakeFetch(
  routes: Array<[string, Handler]>
): { fetchImpl: FetchLike; requests: RecordedRequest[] } {
  const requests: RecordedRequest[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    requests.push({
      url,
      method: init?.method ?? 'GET',
      body: init?.body ? JSON.parse(init.body as string) : null,
    });
    for (const [prefix, handler] of routes) {
      if (url.startsWith(prefix)) {
        const { status, body } = handler(url, init);
        return new Response(JSON.stringify(body), {
          status,
          headers: { 'Content-Type': 'application/json' },
        });
      }
    }
    throw new Error(`unrouted request: ${url}`);
  };
  return { fetchImpl, requests };
}

/** Stateful annotation backend mirroring the service's behaviour. */
export class FakeAnnotationBackend {
  private stored = new Map<string, string>();

  submit(queryId: string, candidateId: string, label: string): { status: number; body: unknown } {
    const key = `${queryId}|${candidateId}`;
    if (this.stored.has(key)) {
      return {
        status: 409,
        body: { code: 'DuplicateAnnotation', message: 'already labelled' },
      };
    }
    this.stored.set(key, label);
    return {
      status: 201,
      body: {
        query_id: queryId,
        candidate_id: candidateId,
        label,
        annotator: 'tester',
        run_id: 'run-1',
        timestamp: '2026-01-01T00:00:00+00:00',
      },
    };
  }

  stats(): { status: number; body: unknown } {
    const labels = ['1', '1a', '2', '3'];
    const counts = new Map(labels.map((l) => [l, 0]));
    for (const label of this.stored.values()) {
      counts.set(label, (counts.get(label) ?? 0) + 1);
    }
    const total = this.stored.size;
    const distribution: Record<string, number> = {};
    for (const label of labels) {
      distribution[label] =
        total === 0 ? 0 : Math.round((10000 * (counts.get(label) ?? 0)) / total) / 100;
    }
    return { status: 200, body: { run_id: 'run-1', total, distribution } };
  }
}
