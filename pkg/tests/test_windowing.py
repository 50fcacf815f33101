import pytest
from hypothesis import given, strategies as st

from parmine.corpus import Document, Sentence
from parmine.errors import DataError
from parmine.windowing import build_windows, read_windows_tsv, write_windows_tsv


def make_doc(lens, doc_id="d", pivot=False):
    sents = [Sentence(doc_id, i, "x" * n) for i, n in enumerate(lens)]
    piv = ["p" * n for n in lens] if pivot else None
    return Document(doc_id, "sa", sents, piv)


def test_worked_example():
    doc = make_doc([50, 60, 70])
    wins = build_windows(doc, min_len=100, stride=1)
    assert [(w.start, w.end, w.char_len) for w in wins] == \
        [(0, 1, 111), (1, 2, 131), (2, 2, 70)]
    assert [w.short for w in wins] == [False, False, True]


def test_empty_document():
    assert build_windows(make_doc([]), min_len=100) == []


def test_single_long_sentence():
    wins = build_windows(make_doc([200]), min_len=100)
    assert [(w.start, w.end, w.char_len) for w in wins] == [(0, 0, 200)]
    assert not wins[0].short


def test_pivot_source():
    doc = make_doc([5, 5], pivot=True)
    wins = build_windows(doc, source="pivot", min_len=100)
    assert wins[0].text == "ppppp ppppp"


def test_pivot_absent_errors():
    with pytest.raises(DataError, match="no pivot"):
        build_windows(make_doc([5]), source="pivot")


def test_stride_two():
    wins = build_windows(make_doc([10, 10, 10, 10, 10]), min_len=15, stride=2)
    assert [(w.position, w.start) for w in wins] == [(0, 0), (1, 2), (2, 4)]


@given(st.lists(st.integers(min_value=1, max_value=40), max_size=20),
       st.integers(min_value=1, max_value=100))
def test_coverage_with_stride_one(lens, min_len):
    wins = build_windows(make_doc(lens), min_len=min_len, stride=1)
    covered = set()
    for w in wins:
        assert w.start <= w.end
        assert w.char_len >= min_len or w.end == len(lens) - 1
        covered.update(range(w.start, w.end + 1))
    assert covered == set(range(len(lens)))
    starts = [w.start for w in wins]
    assert starts == sorted(set(starts))


@given(st.lists(st.integers(min_value=1, max_value=40), min_size=1, max_size=20),
       st.integers(min_value=1, max_value=60),
       st.integers(min_value=1, max_value=60))
def test_end_monotone_in_min_len(lens, a, b):
    lo, hi = sorted((a, b))
    doc = make_doc(lens)
    w_lo = build_windows(doc, min_len=lo)
    w_hi = build_windows(doc, min_len=hi)
    for small, large in zip(w_lo, w_hi):
        assert small.start == large.start
        assert large.end >= small.end


def test_determinism():
    doc = make_doc([7, 13, 21, 4])
    a = build_windows(doc, min_len=20)
    b = build_windows(doc, min_len=20)
    assert a == b


def test_tsv_roundtrip(tmp_path):
    wins = build_windows(make_doc([50, 60, 70]), min_len=100)
    path = tmp_path / "w.tsv"
    write_windows_tsv(wins, str(path))
    rows = read_windows_tsv(str(path))
    assert rows == [(w.doc_id, w.position, w.start, w.end, w.char_len)
                    for w in wins]
