import { Label } from './types';

/** One keypress per judgment: 1, q (for 1a), 2, 3. */
const KEY_TO_LABEL: Record<string, Label> = {
  '1': '1',
  q: '1a',
  '2': '2',
  '3': '3',
};

export function labelForKey(key: string): Label | null {
  return KEY_TO_LABEL[key.toLowerCase()] ?? null;
}
