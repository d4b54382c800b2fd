import { ApiClient, ApiRequestError } from './api';
import { renderPair, PairView } from './render';
import { Label, LabelStats, Question, SamplePair } from './types';

export interface SessionOptions {
  runId: string;
  n: number;
  seed: number;
  annotator: string;
  /** Blind review by default; set true to show the run's model identity. */
  revealModel?: boolean;
}

interface HydratedPair {
  pair: SamplePair;
  query: Question;
  candidate: Question;
}

/**
 * Server-seeded review queue. All truth lives server-side: the sample
 * order comes from the API, labels are stored via the API, and the
 * distribution panel re-reads /api/annotations/stats after each submit
 * rather than recomputing client-side.
 */
export class ReviewSession {
  private items: HydratedPair[] = [];
  private position = 0;
  private labelled = 0;
  private model: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly options: SessionOptions
  ) {}

  async start(): Promise<void> {
    const { runId, n, seed, revealModel } = this.options;
    if (revealModel) {
      const runs = await this.api.listRuns();
      this.model = runs.find((r) => r.run_id === runId)?.model ?? null;
    }
    const sample = await this.api.sample(runId, n, seed);
    this.items = await Promise.all(
      sample.pairs.map(async (pair) => ({
        pair,
        query: await this.api.getQuestion(pair.query_id),
        candidate: await this.api.getQuestion(pair.candidate_id),
      }))
    );
    this.position = 0;
    this.labelled = 0;
  }

  get done(): boolean {
    return this.position >= this.items.length;
  }

  get progress(): { labelled: number; total: number } {
    return { labelled: this.labelled, total: this.items.length };
  }

  current(): PairView | null {
    if (this.done) {
      return null;
    }
    const item = this.items[this.position];
    return renderPair(
      item.query,
      item.candidate,
      this.position + 1,
      this.items.length,
      this.model
    );
  }

  /**
   * Store a label for the current pair. The queue advances only on
   * success; failures (duplicate, invalid, network) surface to the
   * caller with the current item unchanged.
   */
  async submit(label: Label): Promise<LabelStats> {
    if (this.done) {
      throw new Error('review queue is already complete');
    }
    const item = this.items[this.position];
    try {
      await this.api.submitAnnotation(
        this.options.runId,
        item.pair.query_id,
        item.pair.candidate_id,
        label,
        this.options.annotator
      );
    } catch (err) {
      if (err instanceof ApiRequestError && err.code === 'DuplicateAnnotation') {
        // Already stored (e.g. a retried request); skip forward without
        // double-counting.
        this.position += 1;
        return this.api.stats(this.options.runId);
      }
      throw err;
    }
    this.position += 1;
    this.labelled += 1;
    return this.api.stats(this.options.runId);
  }

  stats(): Promise<LabelStats> {
    return this.api.stats(this.options.runId);
  }
}
