"""Loading C projects from disk into an ordered, hashable file list."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

SOURCE_SUFFIXES = (".c", ".h")
HEADER_SUFFIXES = (".h",)


class ProjectError(Exception):
    pass


@dataclass(frozen=True)
class SourceProject:
    """An ordered snapshot of a project's source files.

    Files are sorted lexicographically by relative path so that every
    downstream artifact (document ids, matrices, serialized corpora) is
    deterministic for identical input bytes.
    """

    root_path: str
    files: tuple[tuple[str, str], ...]  # (relative_path, text)

    @classmethod
    def load(cls, root: str | Path, include_headers: bool = True) -> "SourceProject":
        root = Path(root)
        if not root.is_dir():
            raise ProjectError(f"project path does not exist: {root}")
        suffixes = SOURCE_SUFFIXES if include_headers else tuple(
            s for s in SOURCE_SUFFIXES if s not in HEADER_SUFFIXES
        )
        entries: list[tuple[str, str]] = []
        for path in sorted(root.rglob("*")):
            if not path.is_file() or path.suffix not in suffixes:
                continue
            rel = path.relative_to(root).as_posix()
            try:
                text = path.read_bytes().decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ProjectError(f"{rel} is not valid UTF-8: {exc}") from exc
            entries.append((rel, text))
        return cls(root_path=str(root), files=tuple(sorted(entries)))

    @classmethod
    def from_mapping(cls, files: dict[str, str], root: str = "<memory>") -> "SourceProject":
        return cls(root_path=root, files=tuple(sorted(files.items())))

    def file_text(self, rel_path: str) -> str:
        for path, text in self.files:
            if path == rel_path:
                return text
        raise KeyError(rel_path)

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for rel, text in self.files:
            digest.update(rel.encode("utf-8"))
            digest.update(b"\x00")
            digest.update(hashlib.sha256(text.encode("utf-8")).hexdigest().encode())
            digest.update(b"\n")
        return digest.hexdigest()

    def file_hashes(self) -> list[tuple[str, str]]:
        return [
            (rel, hashlib.sha256(text.encode("utf-8")).hexdigest())
            for rel, text in self.files
        ]
