"""Scoring extractions against ground-truth module manifests.

Comparison is a set-level difference between line sets after removing
comment-only and blank lines from both sides: intersecting lines are
correct, truth-only lines are missing, extraction-only lines are
additional. Precision and recall derive from the three counts with 0/0
defined as 0. A built-in grep-style baseline (no external process) extracts
every line containing any search term as a case-insensitive substring,
minus comment-only lines.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import lexer
from .progmodel import K_DECL, K_FUNCTION, K_MACRO, ProgramModel
from .project import SourceProject

TOOL_FEX = "fex"
TOOL_GREP = "grep"

MANIFEST_MAGIC = "FEXT"
MANIFEST_VERSION = 1

CAT_MACRO = "macro-related"
CAT_DECL = "declaration-related"
CAT_MULTILINE = "multi-line"
CAT_OTHER = "other"


class EvalError(Exception):
    pass


LineSet = set[tuple[str, int]]


@dataclass(frozen=True)
class TruthModule:
    name: str
    ranges: tuple[tuple[str, int, int], ...]  # (file, start, end) inclusive
    search_terms: tuple[str, ...]
    notes: str = ""

    def line_set(self) -> LineSet:
        out: LineSet = set()
        for file, start, end in self.ranges:
            for line in range(start, end + 1):
                out.add((file, line))
        return out


@dataclass(frozen=True)
class GroundTruthManifest:
    fingerprint: str  # "-" disables the check
    modules: tuple[TruthModule, ...]

    def module(self, name: str) -> TruthModule:
        for mod in self.modules:
            if mod.name == name:
                return mod
        raise EvalError(f"manifest has no module named {name!r}")


@dataclass
class EvalReport:
    module: str
    tool: str
    correct: LineSet
    missing: LineSet
    additional: LineSet
    precision: float
    recall: float

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.correct), len(self.missing), len(self.additional)


def parse_manifest(text: str) -> GroundTruthManifest:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MANIFEST_MAGIC):
        raise EvalError("not a ground-truth manifest (bad magic)")
    version = int(lines[0].split("\t")[1])
    if version != MANIFEST_VERSION:
        raise EvalError(
            f"manifest version {version} is not supported (expected {MANIFEST_VERSION})"
        )
    fingerprint = "-"
    modules: list[TruthModule] = []
    name = None
    ranges: list[tuple[str, int, int]] = []
    terms: tuple[str, ...] = ()
    notes = ""

    def flush():
        nonlocal name, ranges, terms, notes
        if name is not None:
            modules.append(TruthModule(name, tuple(ranges), terms, notes))
        name, ranges, terms, notes = None, [], (), ""

    for row in lines[1:]:
        fields = row.split("\t")
        key = fields[0]
        if key == "fingerprint":
            fingerprint = fields[1]
        elif key == "module":
            flush()
            name = fields[1]
        elif key == "terms":
            terms = tuple(t.strip().lower() for t in fields[1].split(",") if t.strip())
        elif key == "range":
            ranges.append((fields[1], int(fields[2]), int(fields[3])))
        elif key == "notes":
            notes = fields[1]
        elif key == "end":
            flush()
    flush()
    return GroundTruthManifest(fingerprint, tuple(modules))


def load_manifest(path: str | Path) -> GroundTruthManifest:
    return parse_manifest(Path(path).read_text(encoding="utf-8"))


def render_manifest(manifest: GroundTruthManifest) -> str:
    rows = [f"{MANIFEST_MAGIC}\t{MANIFEST_VERSION}", f"fingerprint\t{manifest.fingerprint}"]
    for mod in manifest.modules:
        rows.append(f"module\t{mod.name}")
        if mod.search_terms:
            rows.append("terms\t" + ",".join(mod.search_terms))
        for file, start, end in mod.ranges:
            rows.append(f"range\t{file}\t{start}\t{end}")
        if mod.notes:
            rows.append(f"notes\t{mod.notes}")
    rows.append("end")
    return "\n".join(rows) + "\n"


# --------------------------------------------------------------------------
# Comparison
# --------------------------------------------------------------------------

def _substantive_lines(project: SourceProject) -> dict[str, set[int]]:
    """Per file: lines that are neither blank nor comment-only."""
    out: dict[str, set[int]] = {}
    for rel, text in project.files:
        scan = lexer.tokenize(text, rel)
        out[rel] = set(scan.code_lines)
    return out


def filter_line_set(line_set: LineSet, project: SourceProject) -> LineSet:
    keep = _substantive_lines(project)
    return {(f, ln) for f, ln in line_set if ln in keep.get(f, set())}


def evaluate(
    slice_lines: LineSet,
    truth: TruthModule,
    project: SourceProject,
    manifest_fingerprint: str = "-",
    tool: str = TOOL_FEX,
) -> EvalReport:
    """Compare an extraction against one ground-truth module."""
    if manifest_fingerprint not in ("-", project.fingerprint()):
        raise EvalError(
            "manifest fingerprint does not match the project; "
            "the ground truth refers to different sources"
        )
    slice_f = filter_line_set(slice_lines, project)
    truth_f = filter_line_set(truth.line_set(), project)
    correct = slice_f & truth_f
    missing = truth_f - slice_f
    additional = slice_f - truth_f
    return EvalReport(
        module=truth.name,
        tool=tool,
        correct=correct,
        missing=missing,
        additional=additional,
        precision=_ratio(len(correct), len(correct) + len(additional)),
        recall=_ratio(len(correct), len(correct) + len(missing)),
    )


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def precision_recall(correct: int, additional: int, missing: int) -> tuple[float, float]:
    """The metric arithmetic on bare counts."""
    return _ratio(correct, correct + additional), _ratio(correct, correct + missing)


def grep_baseline(project: SourceProject, terms: list[str]) -> LineSet:
    """Lines containing any term as a case-insensitive substring, with
    comment-only lines stripped; deterministic and term-order independent."""
    if not terms:
        raise EvalError("grep baseline needs at least one term")
    needles = [t.lower() for t in terms]
    keep = _substantive_lines(project)
    out: LineSet = set()
    for rel, text in project.files:
        substantive = keep[rel]
        for i, line in enumerate(text.splitlines(), start=1):
            if i not in substantive:
                continue
            low = line.lower()
            if any(n in low for n in needles):
                out.add((rel, i))
    return out


# --------------------------------------------------------------------------
# Diff classification
# --------------------------------------------------------------------------

def classify_diff(
    report: EvalReport,
    slice_origins: dict[str, dict[int, str]],
    model: ProgramModel,
) -> tuple[dict[tuple[str, int], str], dict[tuple[str, int], str]]:
    """Tag each missing line with a root-cause category and each additional
    line with the slicer origin that introduced it."""
    missing_tags: dict[tuple[str, int], str] = {}
    for file, line in sorted(report.missing):
        stmt = model.statement_at(file, line)
        if stmt is None:
            missing_tags[(file, line)] = CAT_OTHER
        elif stmt.kind == K_MACRO:
            missing_tags[(file, line)] = CAT_MACRO
        elif stmt.line_span[0] != line:
            missing_tags[(file, line)] = CAT_MULTILINE
        elif stmt.kind in (K_DECL, K_FUNCTION) or stmt.is_prototype:
            missing_tags[(file, line)] = CAT_DECL
        else:
            missing_tags[(file, line)] = CAT_OTHER

    additional_tags: dict[tuple[str, int], str] = {}
    for file, line in sorted(report.additional):
        additional_tags[(file, line)] = slice_origins.get(file, {}).get(line, "?")
    return missing_tags, additional_tags


# --------------------------------------------------------------------------
# Report rendering
# --------------------------------------------------------------------------

def render_report_table(reports: list[EvalReport]) -> str:
    """Human table: per module and tool, the truth module's substantive line
    count, lines extracted correctly, missing, additional, and the derived
    precision/recall."""
    header = (
        f"{'Module':<20} {'Tool':<6} {'Lines':>6} {'Correct':>8} {'Missing':>8} "
        f"{'Additional':>11} {'Precision':>10} {'Recall':>8}"
    )
    rows = [header, "-" * len(header)]
    for r in reports:
        c, m, a = r.counts
        rows.append(
            f"{r.module:<20} {r.tool:<6} {c + m:>6} {c:>8} {m:>8} {a:>11} "
            f"{r.precision:>10.4f} {r.recall:>8.4f}"
        )
    return "\n".join(rows) + "\n"


def render_report_machine(reports: list[EvalReport]) -> str:
    rows = ["FEXR\t1"]
    for r in reports:
        c, m, a = r.counts
        rows.append(
            f"report\t{r.module}\t{r.tool}\t{c}\t{m}\t{a}\t{r.precision:.9g}\t{r.recall:.9g}"
        )
    rows.append("end")
    return "\n".join(rows) + "\n"


def render_scatter(reports: list[EvalReport]) -> str:
    """(precision, recall, label) triplets for plotting."""
    rows = []
    for r in reports:
        rows.append(f"{r.precision:.9g}\t{r.recall:.9g}\t{r.module} ({r.tool})")
    return "\n".join(rows) + "\n"
