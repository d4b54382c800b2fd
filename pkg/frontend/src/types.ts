import { z } from 'zod';

export const Label = z.enum(['1', '1a', '2', '3']);
export type Label = z.infer<typeof Label>;

export const ResponseOption = z.object({
  code: z.string(),
  label: z.string(),
});
export type ResponseOption = z.infer<typeof ResponseOption>;

export const Question = z.object({
  id: z.string(),
  questionnaire: z.string(),
  study: z.string(),
  year: z.number().int(),
  text: z.string(),
  options: z.array(ResponseOption),
  typology: z.string(),
  topic_top: z.string(),
  topic_sub: z.string().nullable(),
  is_code_list: z.boolean(),
});
export type Question = z.infer<typeof Question>;

export const SamplePair = z.object({
  query_id: z.string(),
  candidate_id: z.string(),
});
export type SamplePair = z.infer<typeof SamplePair>;

export const Sample = z.object({
  run_id: z.string(),
  n: z.number().int(),
  seed: z.number().int(),
  pairs: z.array(SamplePair),
});
export type Sample = z.infer<typeof Sample>;

export const RunInfo = z.object({
  run_id: z.string(),
  model: z.string(),
  mode: z.string(),
  k: z.number().int(),
  n_queries: z.number().int(),
});
export type RunInfo = z.infer<typeof RunInfo>;

export const LabelStats = z.object({
  run_id: z.string().nullable(),
  total: z.number().int(),
  distribution: z.record(z.string(), z.number()),
});
export type LabelStats = z.infer<typeof LabelStats>;

export const Annotation = z.object({
  query_id: z.string(),
  candidate_id: z.string(),
  label: Label,
  annotator: z.string(),
  run_id: z.string(),
  timestamp: z.string(),
});
export type Annotation = z.infer<typeof Annotation>;

export const ApiError = z.object({
  code: z.string(),
  message: z.string(),
});
export type ApiError = z.infer<typeof ApiError>;
