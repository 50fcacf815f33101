import numpy as np
import pytest

from parmine.corpus import Document, Sentence
from parmine.embedding import mock_embed
from parmine.errors import DataError
from parmine.knn import (knn_search, mine_pairs, read_pairs_tsv,
                         write_pairs_tsv)
from parmine.windowing import Window, build_windows


def naive_knn(queries, index, k, min_sim):
    """Per-query full scan oracle with the same precision and tie-break."""
    q64 = np.asarray(queries, dtype=np.float32).astype(np.float64)
    i64 = np.asarray(index, dtype=np.float32).astype(np.float64)
    out = []
    for qi in range(q64.shape[0]):
        scored = [(float(np.float32(np.dot(q64[qi], i64[t]))), t)
                  for t in range(i64.shape[0])]
        scored.sort(key=lambda st: (-st[0], st[1]))
        for s, t in scored[:k]:
            if s >= min_sim:
                out.append((qi, t, s))
    return out


def unit_rows(m):
    m = np.asarray(m, dtype=np.float32)
    return (m / np.linalg.norm(m.astype(np.float64), axis=1,
                               keepdims=True)).astype(np.float32)


def test_identity_basis():
    e = np.eye(2, dtype=np.float32)
    hits = knn_search(e, e, k=1, min_sim=0.5)
    assert hits == [(0, 0, 1.0), (1, 1, 1.0)]


def test_orthogonal_pair():
    q = np.array([[1.0, 0.0]], dtype=np.float32)
    idx = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=np.float32)
    hits = knn_search(q, idx, k=2, min_sim=0.0)
    assert hits == [(0, 0, 1.0), (0, 1, 0.0)]


def test_min_sim_cutoff_and_tiebreak():
    q = np.array([[1.0, 0.0]], dtype=np.float32)
    idx = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 0.0]], dtype=np.float32)
    hits = knn_search(q, idx, k=3, min_sim=0.5)
    # two tied top hits, ascending target index; orthogonal row excluded
    assert hits == [(0, 1, 1.0), (0, 2, 1.0)]


def test_empty_index():
    q = np.ones((2, 3), dtype=np.float32)
    assert knn_search(q, np.zeros((0, 3), dtype=np.float32), 5, 0.0) == []


def test_dim_mismatch():
    with pytest.raises(DataError, match="mismatch"):
        knn_search(np.ones((1, 2), dtype=np.float32),
                   np.ones((1, 3), dtype=np.float32), 1, 0.0)


@pytest.mark.parametrize("k", [1, 3, 7])
def test_blocked_equals_oracle_random(k):
    rng = np.random.default_rng(11)
    queries = unit_rows(rng.normal(size=(40, 16)))
    index = unit_rows(rng.normal(size=(300, 16)))
    got = knn_search(queries, index, k=k, min_sim=0.1, block=7)
    assert got == naive_knn(queries, index, k=k, min_sim=0.1)


def test_threaded_equals_single():
    rng = np.random.default_rng(5)
    queries = unit_rows(rng.normal(size=(64, 8)))
    index = unit_rows(rng.normal(size=(200, 8)))
    a = knn_search(queries, index, 5, 0.0, block=16, threads=1)
    b = knn_search(queries, index, 5, 0.0, block=16, threads=4)
    assert a == b


def test_raising_min_sim_gives_subset():
    rng = np.random.default_rng(3)
    queries = unit_rows(rng.normal(size=(20, 8)))
    index = unit_rows(rng.normal(size=(100, 8)))
    lo = set(knn_search(queries, index, 5, 0.0))
    hi = set(knn_search(queries, index, 5, 0.4))
    assert hi <= lo


def corpus_windows(texts_by_doc, min_len=10):
    wins = []
    for doc_id, texts in texts_by_doc.items():
        doc = Document(doc_id, "sa",
                       [Sentence(doc_id, i, t) for i, t in enumerate(texts)])
        wins.extend(build_windows(doc, min_len=min_len))
    return wins


def test_disjoint_corpora_mine_nothing():
    src = corpus_windows({"s": ["aaaa bbbb cccc", "bbbb cccc dddd"]})
    tgt = corpus_windows({"t": ["xxxx yyyy zzzz", "yyyy zzzz wwww"]})
    sm = mock_embed([w.text for w in src])
    tm = mock_embed([w.text for w in tgt])
    assert mine_pairs(src, sm, tgt, tm, k=5, min_sim=0.5) == []


def test_self_mining_excludes_same_doc():
    wins = corpus_windows({"a": ["shared phrase one two"],
                           "b": ["shared phrase one two"]})
    m = mock_embed([w.text for w in wins])
    pairs = mine_pairs(wins, m, wins, m, k=5, min_sim=0.5,
                       exclude_same_doc=True)
    assert pairs
    assert all(p.src.doc_id != p.tgt.doc_id for p in pairs)


def test_planted_parallel_recovered():
    planted = ["the teaching of the way", "a lamp for the dark path",
               "crossing the flood by effort"]
    src = corpus_windows({"s": planted + ["unrelated gibberish qqq"]},
                         min_len=5)
    tgt = corpus_windows({"t": planted}, min_len=5)
    sm = mock_embed([w.text for w in src])
    tm = mock_embed([w.text for w in tgt])
    pairs = mine_pairs(src, sm, tgt, tm, k=3, min_sim=0.5)
    hit_positions = {p.tgt.position for p in pairs if p.sim >= 0.99}
    assert hit_positions == {0, 1, 2}


def test_symmetric_union_superset():
    rng = np.random.default_rng(9)
    src = corpus_windows({"s": ["abcd efgh", "ijkl mnop"]}, min_len=3)
    tgt = corpus_windows({"t": ["abcd efgh", "qrst uvwx"]}, min_len=3)
    sm = mock_embed([w.text for w in src])
    tm = mock_embed([w.text for w in tgt])
    fwd = mine_pairs(src, sm, tgt, tm, k=1, min_sim=0.0)
    both = mine_pairs(src, sm, tgt, tm, k=1, min_sim=0.0, symmetric=True)
    assert {(p.src.index, p.tgt.index) for p in fwd} <= \
        {(p.src.index, p.tgt.index) for p in both}


def test_pairs_tsv_roundtrip(tmp_path):
    src = corpus_windows({"s": ["abcd efgh"]}, min_len=3)
    tgt = corpus_windows({"t": ["abcd efgh"]}, min_len=3)
    pairs = mine_pairs(src, mock_embed([w.text for w in src]),
                       tgt, mock_embed([w.text for w in tgt]),
                       k=1, min_sim=0.5)
    path = tmp_path / "pairs.tsv"
    write_pairs_tsv(pairs, str(path))
    rows = read_pairs_tsv(str(path))
    assert [(r[0], r[1], r[2], r[3]) for r in rows] == \
        [(p.src.doc_id, p.src.position, p.tgt.doc_id, p.tgt.position)
         for p in pairs]
    for r, p in zip(rows, pairs):
        assert r[4] == pytest.approx(p.sim, abs=5e-7)
