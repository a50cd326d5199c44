/** Pure view-state transitions for the search loop.
 *
 * Results are stored exactly as the API delivered them. Responses are
 * matched to requests by sequence number, so a response that arrives
 * after a newer search started is discarded instead of overwriting it.
 */

import type { ApiErrorKind } from "./api.js";
import type { SearchResult } from "./types.js";

export type SampleTab = "top" | "random";

export interface ViewError {
  kind: ApiErrorKind;
  message: string;
}

export interface SearchViewState {
  /** Last submitted query text. */
  query: string;
  inFlight: boolean;
  /** Sequence number of the newest issued search request. */
  seq: number;
  /** Last delivered results; null before the first delivery. */
  results: SearchResult[] | null;
  matchedPatents: number | null;
  error: ViewError | null;
  /** Code of the domain open in the inspection pane. */
  selected: string | null;
  tab: SampleTab;
  /** Submitted queries, append-only within a session. */
  history: readonly string[];
}

export function initialState(): SearchViewState {
  return {
    query: "",
    inFlight: false,
    seq: 0,
    results: null,
    matchedPatents: null,
    error: null,
    selected: null,
    tab: "top",
    history: [],
  };
}

export function searchStarted(
  state: SearchViewState,
  query: string,
  seq: number,
): SearchViewState {
  return {
    ...state,
    query,
    seq,
    inFlight: true,
    error: null,
    history: [...state.history, query],
  };
}

export function searchDelivered(
  state: SearchViewState,
  seq: number,
  results: SearchResult[],
  matchedPatents: number,
): SearchViewState {
  if (seq !== state.seq) {
    return state;
  }
  return {
    ...state,
    inFlight: false,
    results,
    matchedPatents,
    error: null,
    selected: null,
  };
}

export function searchFailed(
  state: SearchViewState,
  seq: number,
  kind: ApiErrorKind,
  message: string,
): SearchViewState {
  if (seq !== state.seq) {
    return state;
  }
  // Prior results stay on screen behind the error banner.
  return { ...state, inFlight: false, error: { kind, message } };
}

export function domainSelected(
  state: SearchViewState,
  code: string,
): SearchViewState {
  return { ...state, selected: code, tab: "top" };
}

export function domainClosed(state: SearchViewState): SearchViewState {
  return { ...state, selected: null };
}

export function tabChanged(
  state: SearchViewState,
  tab: SampleTab,
): SearchViewState {
  return { ...state, tab };
}

/** Query text after copying a token from a patent into the query box. */
export function refineQuery(current: string, token: string): string {
  const trimmed = current.trim();
  return trimmed === "" ? token : `${trimmed} ${token}`;
}
