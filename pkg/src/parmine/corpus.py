"""Corpus ingestion, segmentation and statistics.

Documents are language-tagged sequences of sentences, optionally carrying a
1:1 list of English pivot translations. The on-disk form is JSONL, one
document per line:

    {"doc_id": str, "lang": str, "sentences": [str], "pivot": [str]?}
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field

from .errors import DataError

KNOWN_LANGS = frozenset({"sa", "pi", "bo", "zh", "en"})

_LANG_RE = re.compile(r"^[a-z]{2,3}$")


def validate_lang(code: str) -> str:
    """Check a language code is 2-3 lowercase ASCII letters; return it.

    Codes outside KNOWN_LANGS are accepted (open extension) but are flagged
    in corpus_stats.
    """
    if not isinstance(code, str) or not _LANG_RE.match(code):
        raise DataError(f"invalid language code: {code!r}")
    return code


@dataclass(frozen=True, slots=True)
class Sentence:
    doc_id: str
    index: int
    text: str

    @property
    def char_len(self) -> int:
        return len(self.text)


@dataclass(frozen=True, slots=True)
class SegmentId:
    doc_id: str
    index: int

    def __str__(self) -> str:
        return f"{self.doc_id}#{self.index}"

    @classmethod
    def parse(cls, s: str) -> "SegmentId":
        doc_id, sep, idx = s.rpartition("#")
        if not sep or not doc_id:
            raise DataError(f"bad segment id: {s!r}")
        try:
            return cls(doc_id, int(idx))
        except ValueError:
            raise DataError(f"bad segment id: {s!r}") from None


@dataclass
class Document:
    doc_id: str
    lang: str
    sentences: list[Sentence]
    pivot: list[str] | None = None

    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]


@dataclass
class CorpusStore:
    """Immutable-after-ingest collection of documents, keyed by doc_id."""

    docs: dict[str, Document] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs.values())

    def add(self, doc: Document) -> None:
        if doc.doc_id in self.docs:
            raise DataError(f"duplicate doc_id: {doc.doc_id}")
        self.docs[doc.doc_id] = doc

    def resolve(self, seg: SegmentId) -> Sentence:
        doc = self.docs.get(seg.doc_id)
        if doc is None:
            raise DataError(f"unknown doc_id: {seg.doc_id}")
        if not 0 <= seg.index < len(doc.sentences):
            raise DataError(f"sentence index out of range: {seg}")
        return doc.sentences[seg.index]

    def total_sentences(self) -> int:
        return sum(len(d.sentences) for d in self.docs.values())


def _build_document(rec: dict, default_lang: str | None, lineno: int) -> Document:
    for key in ("doc_id", "sentences"):
        if key not in rec:
            raise DataError(f"line {lineno}: missing field {key!r}")
    doc_id = rec["doc_id"]
    if not isinstance(doc_id, str) or not doc_id:
        raise DataError(f"line {lineno}: doc_id must be a non-empty string")
    lang = validate_lang(rec.get("lang", default_lang or ""))
    raw_sents = rec["sentences"]
    if not isinstance(raw_sents, list) or not all(isinstance(s, str) for s in raw_sents):
        raise DataError(f"line {lineno}: sentences must be a list of strings")
    sentences = []
    for i, text in enumerate(raw_sents):
        if "\n" in text or "\r" in text:
            raise DataError(f"line {lineno}: doc {doc_id}: sentence {i} contains a newline")
        sentences.append(Sentence(doc_id, i, text))
    pivot = rec.get("pivot")
    if pivot is not None:
        if not isinstance(pivot, list) or not all(isinstance(p, str) for p in pivot):
            raise DataError(f"line {lineno}: pivot must be a list of strings")
        if len(pivot) != len(sentences):
            raise DataError(f"pivot length mismatch in doc {doc_id}: "
                            f"{len(pivot)} pivot vs {len(sentences)} sentences")
    return Document(doc_id, lang, sentences, pivot)


def ingest_corpus(stream, lang: str | None = None) -> CorpusStore:
    """Read corpus JSONL from a path, file object or iterable of lines.

    `lang` supplies a default when records omit the "lang" field. Raises
    DataError on malformed lines (with line number), duplicate doc_ids and
    pivot length mismatches.
    """
    if isinstance(stream, str):
        with io.open(stream, "r", encoding="utf-8") as f:
            return ingest_corpus(f, lang)
    store = CorpusStore()
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataError(f"line {lineno}: malformed JSON: {e.msg}") from None
        if not isinstance(rec, dict):
            raise DataError(f"line {lineno}: record must be a JSON object")
        store.add(_build_document(rec, lang, lineno))
    return store


def document_record(doc: Document) -> dict:
    rec = {"doc_id": doc.doc_id, "lang": doc.lang, "sentences": doc.texts()}
    if doc.pivot is not None:
        rec["pivot"] = list(doc.pivot)
    return rec


def write_corpus(store: CorpusStore, path: str) -> None:
    """Serialize a store back to corpus JSONL (UTF-8, LF, no BOM)."""
    with io.open(path, "w", encoding="utf-8", newline="\n") as f:
        for doc in store:
            f.write(json.dumps(document_record(doc), ensure_ascii=False) + "\n")


# Sentence-final delimiters per language; the delimiter stays attached to the
# preceding sentence. English additionally requires trailing whitespace (or
# end of text) after the ender so that abbreviations survive.
_DELIMS = {
    "sa": "।॥",   # danda, double danda
    "pi": "।॥",
    "bo": "།",         # shad
    "zh": "。！？",
}

_EN_SPLIT = re.compile(r"(?<=[.!?])\s+")


def segment_text(raw: str, lang: str) -> list[str]:
    """Split raw text into sentences using per-language delimiters.

    Unknown languages fall back to newline splitting. Never emits an empty
    sentence; whitespace around sentences is trimmed.
    """
    if not raw.strip():
        return []
    if lang == "en":
        pieces = _EN_SPLIT.split(raw)
    elif lang in _DELIMS:
        delims = _DELIMS[lang]
        pieces = []
        buf = []
        chars = list(raw)
        for i, ch in enumerate(chars):
            buf.append(ch)
            nxt = chars[i + 1] if i + 1 < len(chars) else None
            if ch in delims and (nxt is None or nxt not in delims):
                pieces.append("".join(buf))
                buf = []
        if buf:
            pieces.append("".join(buf))
    else:
        pieces = raw.splitlines()
    return [p.strip() for p in pieces if p.strip()]


def corpus_stats(store: CorpusStore) -> dict:
    """Per-language document/sentence counts, mean lengths, pivot coverage."""
    by_lang: dict[str, dict] = {}
    unknown = set()
    for doc in store:
        if doc.lang not in KNOWN_LANGS:
            unknown.add(doc.lang)
        st = by_lang.setdefault(doc.lang, {
            "docs": 0, "sentences": 0, "chars": 0, "pivot_sentences": 0,
        })
        st["docs"] += 1
        st["sentences"] += len(doc.sentences)
        st["chars"] += sum(s.char_len for s in doc.sentences)
        if doc.pivot is not None:
            st["pivot_sentences"] += len(doc.sentences)
    report = {"languages": {}, "unknown_languages": sorted(unknown),
              "total_docs": len(store), "total_sentences": store.total_sentences()}
    for lang, st in sorted(by_lang.items()):
        n = st["sentences"]
        report["languages"][lang] = {
            "docs": st["docs"],
            "sentences": n,
            "mean_char_len": (st["chars"] / n) if n else 0.0,
            "pivot_coverage": (st["pivot_sentences"] / n) if n else 0.0,
        }
    return report


def count_pairs(path: str) -> int:
    """Count records in an aligned-pair file (JSONL or TSV with header)."""
    n = 0
    with io.open(path, "r", encoding="utf-8") as f:
        first = f.readline()
        if not first:
            return 0
        is_tsv = "\t" in first and not first.lstrip().startswith("{")
        if not is_tsv:
            n += 1 if first.strip() else 0
        for line in f:
            if line.strip():
                n += 1
    return n
