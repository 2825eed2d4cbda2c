// Thin wrappers over the documented endpoints. The explorer never computes
// slices locally: every highlight comes from a server response.

import type { QueryResponse, SliceResponse } from "./state.js";

export interface Meta {
  terms: number;
  documents: number;
  files: number;
  weighting: string;
  reduction: { rank: number } | null;
  fingerprint: string;
}

async function getJson<T>(path: string): Promise<T> {
  const resp = await fetch(path);
  if (!resp.ok) throw new Error(await errorText(resp));
  return (await resp.json()) as T;
}

async function postJson<T>(path: string, body: unknown): Promise<T> {
  const resp = await fetch(path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) throw new Error(await errorText(resp));
  return (await resp.json()) as T;
}

async function errorText(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") return body.error;
  } catch {
    // fall through to the status line
  }
  return `${resp.status} ${resp.statusText}`;
}

export function fetchMeta(): Promise<Meta> {
  return getJson("/api/meta");
}

export function fetchFiles(): Promise<{ files: string[] }> {
  return getJson("/api/files");
}

export function fetchFileText(path: string): Promise<{ path: string; text: string }> {
  return getJson(`/api/file?path=${encodeURIComponent(path)}`);
}

export function postQuery(
  terms: string[],
  threshold: number,
  model = "auto",
): Promise<QueryResponse> {
  return postJson("/api/query", { terms, threshold, model });
}

export function postSlice(
  terms: string[],
  threshold: number,
  ipdLimit: number,
  model = "auto",
): Promise<SliceResponse> {
  return postJson("/api/slice", { terms, threshold, ipd_limit: ipdLimit, model });
}
