"""Sentence-level alignment of candidate regions and post-filters.

align_region runs a monotone dynamic program over the (|src|+1) x (|tgt|+1)
lattice with bead types 1-1, 2-1, 1-2, 2-2 plus 1-0 / 0-1 gaps. A bead's
score is the cosine of the embeddings of its concatenated span texts; gap
beads score 0 and cost gap_penalty each. The filter stage drops beads whose
centered moving-average score falls below a threshold and splits the
alignment into the surviving runs; it is applied to a fixpoint so filtering
is idempotent.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from .embedding import ProviderConfig, embed_texts
from .errors import DataError

# (src span length, tgt span length) in deterministic tie-break preference
# order: among equal-scoring alternatives the earlier type wins.
BEAD_TYPES = ((1, 1), (2, 1), (1, 2), (2, 2), (1, 0), (0, 1))

DEFAULT_GAP_PENALTY = 0.15
DEFAULT_MA_WINDOW = 3
DEFAULT_MA_THRESHOLD = 0.5
DEFAULT_REGION_CAP = 512
DEFAULT_RATIO_BOUNDS = (0.33, 3.0)
# CJK characters carry more content per scalar, so zh against Indic/Tibetan
# scripts gets asymmetric bounds.
ZH_VS_OTHER_BOUNDS = (0.1, 1.0)


@dataclass(frozen=True)
class Bead:
    src_span: tuple[int, int]  # half-open [start, stop)
    tgt_span: tuple[int, int]
    score: float

    @property
    def kind(self) -> tuple[int, int]:
        return (self.src_span[1] - self.src_span[0],
                self.tgt_span[1] - self.tgt_span[0])

    @property
    def is_gap(self) -> bool:
        k = self.kind
        return k[0] == 0 or k[1] == 0


@dataclass
class AlignedPair:
    src_doc: str
    src_span: tuple[int, int]
    src_text: str
    tgt_doc: str
    tgt_span: tuple[int, int]
    tgt_text: str
    score: float
    cluster_id: int | None = None


def _span_vectors(sents: list[str], provider: ProviderConfig) -> dict[tuple[int, int], np.ndarray]:
    """Embed all length-1 and length-2 spans in one provider batch."""
    spans = [(i, i + 1) for i in range(len(sents))]
    spans += [(i, i + 2) for i in range(len(sents) - 1)]
    texts = [" ".join(sents[a:b]) for a, b in spans]
    mat = embed_texts(provider, texts).astype(np.float64)
    norms = np.linalg.norm(mat, axis=1)
    if (norms == 0).any():
        raise DataError("provider returned a zero vector for a span")
    mat /= norms[:, None]
    return {span: mat[i] for i, span in enumerate(spans)}


def align_region(src_sents: list[str], tgt_sents: list[str],
                 provider: ProviderConfig,
                 gap_penalty: float = DEFAULT_GAP_PENALTY,
                 region_cap: int = DEFAULT_REGION_CAP) -> list[Bead]:
    """Optimal monotone bead alignment of two sentence lists."""
    if not src_sents or not tgt_sents:
        raise DataError("align_region requires non-empty sentence lists")
    m, n = len(src_sents), len(tgt_sents)
    if m > region_cap or n > region_cap:
        raise DataError(
            f"region of {m}x{n} sentences exceeds cap {region_cap}; "
            "raise the alignment region cap or shrink clusters "
            "(smaller cell_size / higher min_sim)")

    src_vecs = _span_vectors(src_sents, provider)
    tgt_vecs = _span_vectors(tgt_sents, provider)

    neg = float("-inf")
    score = [[neg] * (n + 1) for _ in range(m + 1)]
    back: list[list[tuple[int, int, float] | None]] = \
        [[None] * (n + 1) for _ in range(m + 1)]
    score[0][0] = 0.0
    for i in range(m + 1):
        for j in range(n + 1):
            if i == 0 and j == 0:
                continue
            best = neg
            best_t = None
            best_s = 0.0
            for di, dj in BEAD_TYPES:
                pi, pj = i - di, j - dj
                if pi < 0 or pj < 0 or score[pi][pj] == neg:
                    continue
                if di == 0 or dj == 0:
                    b_score = 0.0
                    cand = score[pi][pj] - gap_penalty
                else:
                    b_score = float(np.dot(src_vecs[(pi, i)], tgt_vecs[(pj, j)]))
                    cand = score[pi][pj] + b_score
                if cand > best:
                    best, best_t, best_s = cand, (di, dj), b_score
            score[i][j] = best
            back[i][j] = (best_t[0], best_t[1], best_s) if best_t else None

    beads = []
    i, j = m, n
    while i > 0 or j > 0:
        di, dj, s = back[i][j]
        beads.append(Bead((i - di, i), (j - dj, j), s))
        i, j = i - di, j - dj
    beads.reverse()
    return beads


def _moving_average(scores: list[float], window: int) -> list[float]:
    h = window // 2
    out = []
    for i in range(len(scores)):
        lo = max(0, i - h)
        hi = min(len(scores), i + h + 1)
        out.append(sum(scores[lo:hi]) / (hi - lo))
    return out


def _filter_once(run: list[Bead], ma_window: int, threshold: float) -> list[list[Bead]]:
    ma = _moving_average([b.score for b in run], ma_window)
    runs = []
    cur: list[Bead] = []
    for b, a in zip(run, ma):
        if a >= threshold:
            cur.append(b)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def filter_alignment(beads: list[Bead], ma_window: int = DEFAULT_MA_WINDOW,
                     threshold: float = DEFAULT_MA_THRESHOLD) -> list[list[Bead]]:
    """Moving-average filter: trim noisy peripheries and split low runs.

    The drop-and-split pass repeats until stable, so the filter is
    idempotent by construction.
    """
    if ma_window < 1 or ma_window % 2 == 0:
        raise DataError(f"ma_window must be odd and >= 1, got {ma_window}")
    if not -1.0 <= threshold <= 1.0:
        raise DataError(f"threshold must be in [-1, 1], got {threshold}")
    runs = [list(beads)] if beads else []
    while True:
        nxt = []
        changed = False
        for run in runs:
            parts = _filter_once(run, ma_window, threshold)
            if len(parts) != 1 or len(parts[0]) != len(run):
                changed = True
            nxt.extend(parts)
        runs = nxt
        if not changed:
            return runs


def default_ratio_bounds(src_lang: str, tgt_lang: str) -> tuple[float, float]:
    indic = {"sa", "pi", "bo"}
    if src_lang == "zh" and tgt_lang in indic:
        return ZH_VS_OTHER_BOUNDS
    if tgt_lang == "zh" and src_lang in indic:
        lo, hi = ZH_VS_OTHER_BOUNDS
        return (1.0 / hi, 1.0 / lo)
    return DEFAULT_RATIO_BOUNDS


def ratio_filter(pair: AlignedPair, bounds: tuple[float, float]) -> tuple[bool, str | None]:
    """Length-ratio sanity filter. Returns (keep, reason_if_dropped)."""
    lo, hi = bounds
    if not 0 < lo <= hi:
        raise DataError(f"invalid ratio bounds: {bounds}")
    src_len = len(pair.src_text)
    tgt_len = len(pair.tgt_text)
    if tgt_len == 0:
        return False, "zero-length target"
    ratio = src_len / tgt_len
    if lo <= ratio <= hi:
        return True, None
    return False, f"length ratio {ratio:.3f} outside [{lo}, {hi}]"


def write_aligned_tsv(pairs: list[AlignedPair], path: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("src_doc\tsrc_span\ttgt_doc\ttgt_span\tscore\tsrc_text\ttgt_text\n")
        for p in pairs:
            f.write(f"{p.src_doc}\t{p.src_span[0]}-{p.src_span[1]}\t"
                    f"{p.tgt_doc}\t{p.tgt_span[0]}-{p.tgt_span[1]}\t"
                    f"{p.score:.6f}\t{p.src_text}\t{p.tgt_text}\n")


def write_aligned_jsonl(pairs: list[AlignedPair], path: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as f:
        for p in pairs:
            f.write(json.dumps({
                "src_doc": p.src_doc,
                "src_span": list(p.src_span),
                "src_text": p.src_text,
                "tgt_doc": p.tgt_doc,
                "tgt_span": list(p.tgt_span),
                "tgt_text": p.tgt_text,
                "score": round(p.score, 6),
                "cluster": p.cluster_id,
            }, ensure_ascii=False) + "\n")
