"""Overlapping sliding windows of adjacent sentences.

A window starts at every stride-th sentence index and extends until its
cumulative character length (including the single joining space per sentence
boundary) reaches min_len, or the document ends. Trailing windows that cannot
reach min_len are kept but flagged short, so document tails stay minable.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

from .corpus import Document
from .errors import DataError

DEFAULT_MIN_LEN = 128
DEFAULT_STRIDE = 1


@dataclass(frozen=True, slots=True)
class Window:
    doc_id: str
    position: int       # ordinal within the document's window list
    start: int          # first sentence index, inclusive
    end: int            # last sentence index, inclusive
    text: str
    short: bool = False

    @property
    def char_len(self) -> int:
        return len(self.text)


def build_windows(doc: Document, source: str = "original",
                  min_len: int = DEFAULT_MIN_LEN,
                  stride: int = DEFAULT_STRIDE) -> list[Window]:
    """Build the window list for one document.

    source selects the sentence stream: "original" uses the document's own
    sentences, "pivot" its pivot translations (error if absent).
    """
    if min_len < 1:
        raise DataError(f"min_len must be >= 1, got {min_len}")
    if stride < 1:
        raise DataError(f"stride must be >= 1, got {stride}")
    if source == "original":
        texts = doc.texts()
    elif source == "pivot":
        if doc.pivot is None:
            raise DataError(f"doc {doc.doc_id} has no pivot translations")
        texts = list(doc.pivot)
    else:
        raise DataError(f"unknown window source: {source!r}")

    n = len(texts)
    windows = []
    for pos, start in enumerate(range(0, n, stride)):
        end = start
        length = len(texts[start])
        while length < min_len and end + 1 < n:
            end += 1
            length += 1 + len(texts[end])  # joining space
        windows.append(Window(
            doc_id=doc.doc_id,
            position=pos,
            start=start,
            end=end,
            text=" ".join(texts[start:end + 1]),
            short=length < min_len,
        ))
    return windows


def write_windows_tsv(windows: list[Window], path: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("doc_id\tposition\tstart\tend\tchar_len\n")
        for w in windows:
            f.write(f"{w.doc_id}\t{w.position}\t{w.start}\t{w.end}\t{w.char_len}\n")


def read_windows_tsv(path: str) -> list[tuple[str, int, int, int, int]]:
    """Read a window dump back as (doc_id, position, start, end, char_len)."""
    rows = []
    with io.open(path, "r", encoding="utf-8") as f:
        header = f.readline()
        if not header.startswith("doc_id\t"):
            raise DataError(f"{path}: not a window TSV")
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 5:
                raise DataError(f"{path}:{lineno}: expected 5 columns")
            rows.append((parts[0], int(parts[1]), int(parts[2]),
                         int(parts[3]), int(parts[4])))
    return rows
