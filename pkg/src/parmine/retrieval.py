"""Retrieval evaluation: negative pools, BM25 Okapi, dense ranking, P@k.

The protocol samples a large pool of negatives from the target corpora
(weighted per language, largest-remainder rounding, seeded and without
replacement), guarantees gold targets are present, ranks with either sparse
BM25 or dense dot-product retrieval, and reports P@1/P@5/P@10.
"""

from __future__ import annotations

import io
import json
import math
import random
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import SegmentId
from .errors import DataError

DEFAULT_K1 = 1.5
DEFAULT_B = 0.75
P_AT_KS = (1, 5, 10)


@dataclass(slots=True)
class PoolItem:
    seg: SegmentId
    text: str
    lang: str
    pivot: str | None = None


@dataclass
class EvalQuery:
    text: str
    lang: str
    gold: SegmentId


@dataclass
class EvalTask:
    name: str
    queries: list[EvalQuery]


@dataclass
class Metrics:
    p_at: dict[int, float]
    n_queries: int


def largest_remainder(total: int, weights: dict[str, float]) -> dict[str, int]:
    """Integer shares of `total` per key, exact sum, ties by key order."""
    if abs(sum(weights.values()) - 1.0) > 1e-9:
        raise DataError(f"weights must sum to 1, got {sum(weights.values())}")
    keys = sorted(weights)
    shares = {k: total * weights[k] for k in keys}
    counts = {k: int(math.floor(shares[k])) for k in keys}
    leftover = total - sum(counts.values())
    by_frac = sorted(keys, key=lambda k: (-(shares[k] - counts[k]), k))
    for k in by_frac[:leftover]:
        counts[k] += 1
    return counts


def sample_negatives(corpora: dict[str, list[PoolItem]], total: int,
                     weights: dict[str, float], seed: int,
                     golds: list[PoolItem] | None = None) -> list[PoolItem]:
    """Weighted per-language sample without replacement, gold-completed.

    Counts follow largest-remainder rounding so they sum exactly to total.
    Gold items absent from the sample are appended afterward.
    """
    counts = largest_remainder(total, weights)
    rng = random.Random(seed)
    pool: list[PoolItem] = []
    for lang in sorted(counts):
        want = counts[lang]
        corpus = corpora.get(lang, [])
        if len(corpus) < want:
            raise DataError(f"corpus for language {lang!r} too small: "
                            f"{len(corpus)} < {want}")
        pool.extend(rng.sample(corpus, want))
    if golds:
        present = {item.seg for item in pool}
        for g in golds:
            if g.seg not in present:
                pool.append(g)
                present.add(g.seg)
    return pool


_EN_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize_for_bm25(text: str, lang: str) -> list[str]:
    """Language-aware tokenization for sparse retrieval.

    zh: one token per character, punctuation/whitespace excluded;
    en: lowercase alphanumeric runs; everything else: whitespace split.
    """
    if lang == "zh":
        return [ch for ch in text
                if not unicodedata.category(ch)[0] in ("P", "Z", "C", "S")]
    if lang == "en":
        return _EN_TOKEN.findall(text.lower())
    return text.split()


@dataclass
class BM25Index:
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    doc_tokens: list[list[str]] = field(default_factory=list)
    doc_lens: list[int] = field(default_factory=list)
    avgdl: float = 0.0
    doc_freq: Counter = field(default_factory=Counter)
    term_freqs: list[Counter] = field(default_factory=list)

    @property
    def n_docs(self) -> int:
        return len(self.doc_tokens)

    def idf(self, term: str) -> float:
        n_t = self.doc_freq.get(term, 0)
        return math.log(1.0 + (self.n_docs - n_t + 0.5) / (n_t + 0.5))

    def score(self, query: list[str], doc: int) -> float:
        tf = self.term_freqs[doc]
        dl = self.doc_lens[doc]
        norm = self.k1 * (1.0 - self.b + self.b * dl / self.avgdl)
        s = 0.0
        for t in query:
            f = tf.get(t, 0)
            if f:
                s += self.idf(t) * f * (self.k1 + 1.0) / (f + norm)
        return s


def bm25_build(docs: list[list[str]], k1: float = DEFAULT_K1,
               b: float = DEFAULT_B) -> BM25Index:
    if not docs:
        raise DataError("bm25_build requires at least one document")
    idx = BM25Index(k1=k1, b=b)
    idx.doc_tokens = [list(d) for d in docs]
    idx.doc_lens = [len(d) for d in idx.doc_tokens]
    idx.avgdl = sum(idx.doc_lens) / len(idx.doc_lens)
    idx.term_freqs = [Counter(d) for d in idx.doc_tokens]
    for tf in idx.term_freqs:
        idx.doc_freq.update(tf.keys())
    return idx


def bm25_rank(index: BM25Index, query: list[str]) -> list[int]:
    """Doc ids ranked by descending BM25 score, ties by ascending id."""
    scores = [index.score(query, d) for d in range(index.n_docs)]
    return sorted(range(index.n_docs), key=lambda d: (-scores[d], d))


def dense_rank(query: np.ndarray, pool: np.ndarray) -> list[int]:
    """Pool ids ranked by descending dot product, ties by ascending id."""
    query = np.asarray(query, dtype=np.float64).ravel()
    pool = np.asarray(pool, dtype=np.float64)
    if pool.shape[1] != query.shape[0]:
        raise DataError(f"dimension mismatch: query {query.shape[0]} "
                        f"vs pool {pool.shape[1]}")
    scores = pool @ query
    order = np.lexsort((np.arange(pool.shape[0]), -scores))
    return [int(i) for i in order]


def precision_at_k(rankings: dict, golds: dict, ks=P_AT_KS) -> Metrics:
    """P@k = fraction of queries whose gold id is in the top k."""
    if not golds:
        raise DataError("precision_at_k requires at least one query")
    hits = {k: 0 for k in ks}
    for qid, gold in golds.items():
        if qid not in rankings:
            raise DataError(f"missing ranking for query {qid!r}")
        ranked = rankings[qid]
        for k in ks:
            if gold in ranked[:k]:
                hits[k] += 1
    n = len(golds)
    return Metrics(p_at={k: hits[k] / n for k in ks}, n_queries=n)


def load_task_jsonl(path: str, name: str | None = None) -> EvalTask:
    """Task JSONL: {"query": str, "query_lang": str, "gold": "doc_id#index"}."""
    queries = []
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: malformed JSON: {e.msg}") from None
            for key in ("query", "query_lang", "gold"):
                if key not in rec:
                    raise DataError(f"{path}:{lineno}: missing field {key!r}")
            queries.append(EvalQuery(rec["query"], rec["query_lang"],
                                     SegmentId.parse(rec["gold"])))
    if not queries:
        raise DataError(f"{path}: task has no queries")
    return EvalTask(name or path, queries)


def format_percent(frac: float) -> str:
    """Two-digit percentage in the 93-style used by the report."""
    return f"{round(frac * 100):02d}"


def metrics_row(m: Metrics) -> str:
    return "·".join(format_percent(m.p_at[k]) for k in sorted(m.p_at))
