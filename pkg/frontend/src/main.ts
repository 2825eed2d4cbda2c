// DOM wiring for the explorer: terms box, threshold slider, code view with
// highlighted lines and origin tooltips, per-document score sidebar, and a
// pin/diff mode. Slider requests fire on release only; stale responses are
// discarded by the session-state guard.

import { fetchFiles, fetchFileText, fetchMeta, postQuery, postSlice } from "./api.js";
import {
  DiffMark,
  SessionState,
  SliceView,
  applyError,
  applyResponse,
  beginRequest,
  canDispatch,
  clampThreshold,
  clearPin,
  diffLines,
  filesOfInterest,
  highlightedLines,
  initialState,
  originOf,
  parseTerms,
  pinCurrent,
  totalHighlighted,
} from "./state.js";

let state: SessionState = initialState();
let allFiles: string[] = [];
const fileTexts = new Map<string, string>();
let activeFile: string | null = null;

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

function toast(message: string): void {
  const el = $("toast");
  el.textContent = message;
  el.classList.add("visible");
  window.setTimeout(() => el.classList.remove("visible"), 4000);
}

async function ensureFileText(path: string): Promise<string> {
  const cached = fileTexts.get(path);
  if (cached !== undefined) return cached;
  const body = await fetchFileText(path);
  fileTexts.set(path, body.text);
  return body.text;
}

function currentQueryInputs(): { terms: string[]; threshold: number; ipd: number } {
  const terms = parseTerms(($("terms") as HTMLInputElement).value);
  const threshold = clampThreshold(parseFloat(($("threshold") as HTMLInputElement).value));
  const ipd = Math.max(0, parseInt(($("ipd") as HTMLInputElement).value || "2", 10));
  return { terms, threshold, ipd };
}

async function dispatchSlice(): Promise<void> {
  const raw = ($("terms") as HTMLInputElement).value;
  if (!canDispatch(raw)) {
    toast("enter at least one search term");
    return;
  }
  const { terms, threshold, ipd } = currentQueryInputs();
  const begun = beginRequest(state);
  state = begun.state;
  const seq = begun.seq;
  $("status").textContent = "extracting…";
  try {
    const [slice, query] = await Promise.all([
      postSlice(terms, threshold, ipd),
      postQuery(terms, threshold),
    ]);
    const view: SliceView = {
      terms,
      threshold,
      ipdLimit: ipd,
      slice,
      scores: query.documents,
    };
    state = applyResponse(state, seq, view);
  } catch (err) {
    state = applyError(state, seq, err instanceof Error ? err.message : String(err));
    if (state.error) toast(state.error);
  }
  render();
}

function render(): void {
  const view = state.current;
  $("status").textContent = view
    ? `${totalHighlighted(view)} lines highlighted (terms: ${view.terms.join(", ")}, ` +
      `threshold ${view.threshold.toFixed(2)}, ipd ${view.ipdLimit})`
    : "no extraction yet";
  renderScores(view);
  renderFileTabs();
  void renderCode();
  renderDiagnostics(view);
  $("pin").toggleAttribute("disabled", !view);
  $("unpin").toggleAttribute("disabled", !state.pinned);
}

function renderScores(view: SliceView | null): void {
  const list = $("scores");
  list.innerHTML = "";
  if (!view) return;
  const sorted = [...view.scores].sort((a, b) => b.score - a.score);
  for (const doc of sorted) {
    const li = document.createElement("li");
    li.textContent = `${doc.score.toFixed(4)}  ${doc.name}`;
    li.title = `${doc.kind} in ${doc.file}`;
    list.appendChild(li);
  }
  if (sorted.length === 0) {
    const li = document.createElement("li");
    li.textContent = "no documents met the threshold";
    li.className = "empty";
    list.appendChild(li);
  }
}

function renderFileTabs(): void {
  const tabs = $("files");
  tabs.innerHTML = "";
  const names = filesOfInterest(state.current, state.pinned, allFiles);
  if (activeFile === null || !names.includes(activeFile)) {
    activeFile = names[0] ?? null;
  }
  for (const name of names) {
    const btn = document.createElement("button");
    btn.textContent = name;
    btn.className = name === activeFile ? "tab active" : "tab";
    btn.addEventListener("click", () => {
      activeFile = name;
      render();
    });
    tabs.appendChild(btn);
  }
}

async function renderCode(): Promise<void> {
  const host = $("code");
  if (!activeFile) {
    host.textContent = "";
    return;
  }
  let text: string;
  try {
    text = await ensureFileText(activeFile);
  } catch (err) {
    host.innerHTML = "";
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = `could not load ${activeFile}: ${
      err instanceof Error ? err.message : String(err)
    }`;
    host.appendChild(banner);
    return;
  }
  const marks: Map<number, DiffMark> | null = state.pinned
    ? diffLines(state.current, state.pinned, activeFile)
    : null;
  const highlighted = highlightedLines(state.current, activeFile);

  host.innerHTML = "";
  const table = document.createElement("table");
  table.className = "code";
  text.split("\n").forEach((content, idx) => {
    const line = idx + 1;
    const tr = document.createElement("tr");
    if (marks) {
      const mark = marks.get(line);
      if (mark) tr.className = `line-${mark}`;
    } else if (highlighted.has(line)) {
      tr.className = "line-hit";
    }
    const origin = originOf(state.current, activeFile!, line);
    if (origin) tr.title = origin;
    const num = document.createElement("td");
    num.className = "num";
    num.textContent = String(line);
    const src = document.createElement("td");
    src.textContent = content;
    tr.append(num, src);
    table.appendChild(tr);
  });
  host.appendChild(table);
}

function renderDiagnostics(view: SliceView | null): void {
  const box = $("diagnostics");
  box.innerHTML = "";
  if (!view) return;
  for (const diag of view.slice.diagnostics) {
    const p = document.createElement("p");
    p.textContent = diag;
    box.appendChild(p);
  }
}

async function boot(): Promise<void> {
  try {
    const [meta, files] = await Promise.all([fetchMeta(), fetchFiles()]);
    allFiles = files.files;
    $("meta").textContent =
      `${meta.terms} terms / ${meta.documents} documents / ` +
      `${meta.weighting}${meta.reduction ? ` (rank ${meta.reduction.rank})` : ""}`;
  } catch (err) {
    toast(`service unreachable: ${err instanceof Error ? err.message : err}`);
    return;
  }

  const slider = $("threshold") as HTMLInputElement;
  const sliderLabel = $("threshold-label");
  slider.addEventListener("input", () => {
    sliderLabel.textContent = clampThreshold(parseFloat(slider.value)).toFixed(2);
  });
  // dispatch on release only; extraction can take a while on big corpora
  slider.addEventListener("change", () => void dispatchSlice());
  $("terms").addEventListener("keydown", (ev) => {
    if ((ev as KeyboardEvent).key === "Enter") void dispatchSlice();
  });
  $("go").addEventListener("click", () => void dispatchSlice());
  $("ipd").addEventListener("change", () => void dispatchSlice());
  $("pin").addEventListener("click", () => {
    state = pinCurrent(state);
    render();
  });
  $("unpin").addEventListener("click", () => {
    state = clearPin(state);
    render();
  });
  render();
}

void boot();
