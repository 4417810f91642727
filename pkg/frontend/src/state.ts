import { Match } from './types';

/**
 * Single source of truth for the page. The results field always corresponds
 * to the (dataset, subject, pose, type, metric, k) tuple that produced it;
 * anything newer in flight is tracked by the request token.
 */
export interface UiState {
  dataset: string;
  subject: string;
  pose: string;
  type: string;
  metric: string;
  k: number;
  cutK: number;
  results: Match[];
  resultsStale: boolean;
  error: string | null;
  requestToken: number;
}

export const DEFAULT_STATE: UiState = {
  dataset: '',
  subject: '',
  pose: 'standing',
  type: 'distance15',
  metric: 'l2',
  k: 10,
  cutK: 2,
  results: [],
  resultsStale: false,
  error: null,
  requestToken: 0,
};

/** Everything needed to reproduce the session lives in the URL. */
export function encodeState(state: UiState): string {
  const params = new URLSearchParams({
    dataset: state.dataset,
    subject: state.subject,
    pose: state.pose,
    type: state.type,
    metric: state.metric,
    k: String(state.k),
    cut: String(state.cutK),
  });
  return params.toString();
}

export function decodeState(search: string): UiState {
  const params = new URLSearchParams(search);
  const num = (key: string, fallback: number) => {
    const raw = Number(params.get(key));
    return Number.isInteger(raw) && raw >= 1 ? raw : fallback;
  };
  return {
    ...DEFAULT_STATE,
    dataset: params.get('dataset') ?? DEFAULT_STATE.dataset,
    subject: params.get('subject') ?? DEFAULT_STATE.subject,
    pose: params.get('pose') ?? DEFAULT_STATE.pose,
    type: params.get('type') ?? DEFAULT_STATE.type,
    metric: params.get('metric') ?? DEFAULT_STATE.metric,
    k: num('k', DEFAULT_STATE.k),
    cutK: num('cut', DEFAULT_STATE.cutK),
  };
}

/** Stamp a new in-flight request; responses carrying an older token are stale. */
export function beginRequest(state: UiState): UiState {
  return { ...state, requestToken: state.requestToken + 1 };
}

/**
 * Apply a query response only if it answers the latest request. Late
 * responses (an older token) leave the state untouched, so fast follow-up
 * queries can never be overwritten by a slow predecessor.
 */
export function applyResults(state: UiState, token: number, matches: Match[]): UiState {
  if (token !== state.requestToken) return state;
  return { ...state, results: matches, resultsStale: false, error: null };
}

/** Service failure: keep showing the previous results, but mark them stale. */
export function applyError(state: UiState, token: number, message: string): UiState {
  if (token !== state.requestToken) return state;
  return { ...state, error: message, resultsStale: true };
}

export function clearError(state: UiState): UiState {
  return { ...state, error: null };
}

/** The query-by-example loop: a clicked result becomes the next query. */
export function promoteResult(state: UiState, subjectId: string): UiState {
  return { ...state, subject: subjectId };
}

export function setCutK(state: UiState, cutK: number): UiState {
  return { ...state, cutK };
}
