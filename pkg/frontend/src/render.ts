import { Question } from './types';

export interface QuestionView {
  id: string;
  text: string;
  /** Options rendered "code, label" in stored order. */
  options: string[];
  provenance: string;
  topic: string;
}

export interface PairView {
  query: QuestionView;
  candidate: QuestionView;
  /** Set when candidate text equals query text exactly. */
  exactDuplicate: boolean;
  position: number;
  total: number;
  /** Model identity; null while blind review is on. */
  model: string | null;
}

function topicLine(q: Question): string {
  return q.topic_sub ? `${q.topic_top} / ${q.topic_sub}` : q.topic_top;
}

export function questionView(q: Question): QuestionView {
  return {
    id: q.id,
    text: q.text,
    options: q.options.map((o) => `${o.code}, ${o.label}`),
    provenance: `${q.questionnaire} (${q.study}, ${q.year})`,
    topic: topicLine(q),
  };
}

export function renderPair(
  query: Question,
  candidate: Question,
  position: number,
  total: number,
  model: string | null = null
): PairView {
  return {
    query: questionView(query),
    candidate: questionView(candidate),
    exactDuplicate: query.text === candidate.text,
    position,
    total,
    model,
  };
}
