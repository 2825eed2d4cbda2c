// Session state for the explorer. Pure functions only: the DOM layer feeds
// events in and renders whatever comes out, so the request-ordering rules
// and diff logic are testable without a browser.

export interface SliceFile {
  lines: number[];
  origins: Record<string, string>;
}

export interface SliceResponse {
  model: string;
  files: Record<string, SliceFile>;
  diagnostics: string[];
}

export interface DocScore {
  id: number;
  score: number;
  kind: string;
  name: string;
  file: string;
}

export interface QueryResponse {
  model: string;
  documents: DocScore[];
  related_terms: Record<string, unknown[]>;
  diagnostics: string[];
}

export interface SliceView {
  terms: string[];
  threshold: number;
  ipdLimit: number;
  slice: SliceResponse;
  scores: DocScore[];
}

export interface SessionState {
  nextSeq: number;      // sequence number handed to the next dispatch
  appliedSeq: number;   // highest sequence applied to the view
  current: SliceView | null;
  pinned: SliceView | null;
  error: string | null;
}

export function initialState(): SessionState {
  return { nextSeq: 0, appliedSeq: -1, current: null, pinned: null, error: null };
}

export function clampThreshold(value: number): number {
  // slider domain: [0, 1] in steps of 0.01
  const clamped = Math.min(1, Math.max(0, value));
  return Math.round(clamped * 100) / 100;
}

export function parseTerms(raw: string): string[] {
  return raw
    .split(",")
    .map((t) => t.trim().toLowerCase())
    .filter((t) => t.length > 0);
}

export function canDispatch(raw: string): boolean {
  return parseTerms(raw).length > 0;
}

/** Claim a sequence number for a request about to be sent. */
export function beginRequest(state: SessionState): { state: SessionState; seq: number } {
  return { state: { ...state, nextSeq: state.nextSeq + 1 }, seq: state.nextSeq };
}

/**
 * Apply a slice response. Responses that arrive after a newer request has
 * already been applied are stale and ignored: the view always reflects the
 * most recently dispatched query, regardless of network ordering.
 */
export function applyResponse(
  state: SessionState,
  seq: number,
  view: SliceView,
): SessionState {
  if (seq < state.appliedSeq) {
    return state; // stale: a newer response is already displayed
  }
  return { ...state, appliedSeq: seq, current: view, error: null };
}

/** A failed request keeps the previous view and records the message. */
export function applyError(state: SessionState, seq: number, message: string): SessionState {
  if (seq < state.appliedSeq) {
    return state;
  }
  return { ...state, error: message };
}

export function pinCurrent(state: SessionState): SessionState {
  return state.current ? { ...state, pinned: state.current } : state;
}

export function clearPin(state: SessionState): SessionState {
  return { ...state, pinned: null };
}

export function highlightedLines(view: SliceView | null, file: string): Set<number> {
  if (!view) return new Set();
  const entry = view.slice.files[file];
  return new Set(entry ? entry.lines : []);
}

export function originOf(view: SliceView | null, file: string, line: number): string | null {
  if (!view) return null;
  const entry = view.slice.files[file];
  if (!entry) return null;
  return entry.origins[String(line)] ?? null;
}

export function totalHighlighted(view: SliceView | null): number {
  if (!view) return 0;
  return Object.values(view.slice.files).reduce((n, f) => n + f.lines.length, 0);
}

export type DiffMark = "both" | "added" | "removed";

/**
 * Line-by-line diff of the current slice against the pinned one:
 * `added` lines are only in the current slice, `removed` only in the pin.
 */
export function diffLines(
  current: SliceView | null,
  pinned: SliceView | null,
  file: string,
): Map<number, DiffMark> {
  const out = new Map<number, DiffMark>();
  const now = highlightedLines(current, file);
  const before = highlightedLines(pinned, file);
  for (const line of now) {
    out.set(line, before.has(line) ? "both" : "added");
  }
  for (const line of before) {
    if (!now.has(line)) out.set(line, "removed");
  }
  return out;
}

/** Files worth listing: everything mentioned by either view, sorted. */
export function filesOfInterest(
  current: SliceView | null,
  pinned: SliceView | null,
  allFiles: string[],
): string[] {
  const touched = new Set<string>();
  for (const view of [current, pinned]) {
    if (view) for (const f of Object.keys(view.slice.files)) touched.add(f);
  }
  return allFiles.filter((f) => touched.size === 0 || touched.has(f));
}
