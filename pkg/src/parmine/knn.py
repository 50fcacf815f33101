"""Exact top-k nearest-neighbor search over normalized window embeddings.

Search is exhaustive: query blocks are multiplied against the whole index
(float32 storage, float64 accumulation) so results equal a naive per-query
full scan exactly, including tie-break order. Blocking and threading are
performance details only.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .windowing import Window

DEFAULT_K = 5
DEFAULT_MIN_SIM = 0.65


@dataclass(frozen=True, slots=True)
class WindowRef:
    doc_id: str
    position: int
    index: int  # global index into the corpus window list


@dataclass(frozen=True, slots=True)
class CandidatePair:
    src: WindowRef
    tgt: WindowRef
    sim: float


def _topk_block(scores: np.ndarray, base: int, k: int, min_sim: float):
    hits = []
    n = scores.shape[1]
    order_keys = np.arange(n)
    for r in range(scores.shape[0]):
        row = scores[r]
        # primary: descending sim; secondary: ascending target index
        order = np.lexsort((order_keys, -row))
        taken = 0
        row_hits = []
        for t in order:
            if taken >= k:
                break
            s = float(row[t])
            if s < min_sim:
                break
            row_hits.append((base + r, int(t), s))
            taken += 1
        hits.extend(row_hits)
    return hits


def knn_search(queries: np.ndarray, index: np.ndarray, k: int,
               min_sim: float, block: int = 512,
               threads: int = 1) -> list[tuple[int, int, float]]:
    """Return (query_index, target_index, sim) triples.

    For each query row, the exact top-k index rows by dot product with
    sim >= min_sim; ties broken by ascending target index; output sorted by
    (query index, descending sim, target index).
    """
    queries = np.asarray(queries, dtype=np.float32)
    index = np.asarray(index, dtype=np.float32)
    if index.size == 0 or queries.size == 0:
        return []
    if queries.shape[1] != index.shape[1]:
        raise DataError(f"dimension mismatch: queries dim {queries.shape[1]} "
                        f"vs index dim {index.shape[1]}")
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")

    q64 = queries.astype(np.float64)
    i64t = index.astype(np.float64).T
    starts = list(range(0, q64.shape[0], block))

    def work(lo):
        # float64 accumulation, float32 storage: rounding the scores makes
        # the result independent of the BLAS kernel's summation order
        scores = (q64[lo:lo + block] @ i64t).astype(np.float32)
        return _topk_block(scores, lo, k, min_sim)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(lo) for lo in starts]
    out = []
    for p in parts:
        out.extend(p)
    return out


def mine_pairs(src_windows: list[Window], src_matrix: np.ndarray,
               tgt_windows: list[Window], tgt_matrix: np.ndarray,
               k: int = DEFAULT_K, min_sim: float = DEFAULT_MIN_SIM,
               symmetric: bool = False, exclude_same_doc: bool = True,
               threads: int = 1) -> list[CandidatePair]:
    """Mine candidate pairs from source windows into target windows.

    With symmetric=True the reverse search runs too and its hits are
    transposed into the union. Pairs whose windows share a doc_id are
    dropped when exclude_same_doc is set (self-mining a corpus).
    """
    if len(src_windows) != src_matrix.shape[0]:
        raise DataError("source windows/matrix row count mismatch")
    if len(tgt_windows) != tgt_matrix.shape[0]:
        raise DataError("target windows/matrix row count mismatch")

    hits = knn_search(src_matrix, tgt_matrix, k, min_sim, threads=threads)
    seen = set()
    raw = []
    for x, y, s in hits:
        if (x, y) not in seen:
            seen.add((x, y))
            raw.append((x, y, s))
    if symmetric:
        rev = knn_search(tgt_matrix, src_matrix, k, min_sim, threads=threads)
        for y, x, s in rev:
            if (x, y) not in seen:
                seen.add((x, y))
                raw.append((x, y, s))

    pairs = []
    for x, y, s in raw:
        sw, tw = src_windows[x], tgt_windows[y]
        if exclude_same_doc and sw.doc_id == tw.doc_id:
            continue
        pairs.append(CandidatePair(
            src=WindowRef(sw.doc_id, sw.position, x),
            tgt=WindowRef(tw.doc_id, tw.position, y),
            sim=s,
        ))
    pairs.sort(key=lambda p: (p.src.index, -p.sim, p.tgt.index))
    return pairs


def write_pairs_tsv(pairs: list[CandidatePair], path: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("src_doc\tsrc_pos\ttgt_doc\ttgt_pos\tsim\n")
        for p in pairs:
            f.write(f"{p.src.doc_id}\t{p.src.position}\t"
                    f"{p.tgt.doc_id}\t{p.tgt.position}\t{p.sim:.6f}\n")


def read_pairs_tsv(path: str) -> list[tuple[str, int, str, int, float]]:
    rows = []
    with io.open(path, "r", encoding="utf-8") as f:
        header = f.readline()
        if not header.startswith("src_doc\t"):
            raise DataError(f"{path}: not a pair TSV")
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 5:
                raise DataError(f"{path}:{lineno}: expected 5 columns")
            rows.append((parts[0], int(parts[1]), parts[2], int(parts[3]),
                         float(parts[4])))
    return rows
