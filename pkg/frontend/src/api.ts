import {
  Annotation,
  ApiError,
  Label,
  LabelStats,
  Question,
  RunInfo,
  Sample,
} from './types';
import { z } from 'zod';

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the review service; every payload is validated. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = fetch
  ) {}

  private async request<T>(
    schema: z.ZodType<T>,
    path: string,
    init?: RequestInit
  ): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body: unknown = await response.json();
    if (!response.ok) {
      const err = ApiError.safeParse(body);
      if (err.success) {
        throw new ApiRequestError(response.status, err.data.code, err.data.message);
      }
      throw new ApiRequestError(response.status, 'Unknown', `HTTP ${response.status}`);
    }
    return schema.parse(body);
  }

  listRuns(): Promise<RunInfo[]> {
    return this.request(z.array(RunInfo), '/api/runs');
  }

  getQuestion(id: string): Promise<Question> {
    return this.request(Question, `/api/questions/${encodeURIComponent(id)}`);
  }

  sample(runId: string, n: number, seed: number): Promise<Sample> {
    const params = new URLSearchParams({
      run_id: runId,
      n: String(n),
      seed: String(seed),
    });
    return this.request(Sample, `/api/sample?${params}`);
  }

  submitAnnotation(
    runId: string,
    queryId: string,
    candidateId: string,
    label: Label,
    annotator: string
  ): Promise<Annotation> {
    return this.request(Annotation, '/api/annotations', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({
        run_id: runId,
        query_id: queryId,
        candidate_id: candidateId,
        label,
        annotator,
      }),
    });
  }

  stats(runId: string): Promise<LabelStats> {
    const params = new URLSearchParams({ run_id: runId });
    return this.request(LabelStats, `/api/annotations/stats?${params}`);
  }
}
