import pytest

from parmine.audit import (AuditRecord, read_audit_tsv, report_rates,
                           sample_for_audit, write_audit_tsv)
from parmine.errors import DataError


def recs(n_perfect, n_partly, n_wrong):
    out = [AuditRecord(f"p{i}", "Perfect") for i in range(n_perfect)]
    out += [AuditRecord(f"q{i}", "PartlyCorrect") for i in range(n_partly)]
    out += [AuditRecord(f"r{i}", "Wrong") for i in range(n_wrong)]
    return out


def test_rates_73_16_11():
    assert report_rates(recs(73, 16, 11)) == \
        {"Perfect": 73, "PartlyCorrect": 16, "Wrong": 11}


def test_rates_all_perfect():
    assert report_rates(recs(5, 0, 0)) == \
        {"Perfect": 100, "PartlyCorrect": 0, "Wrong": 0}


def test_rates_largest_remainder_tie():
    assert report_rates(recs(1, 1, 1)) == \
        {"Perfect": 34, "PartlyCorrect": 33, "Wrong": 33}


def test_rates_sum_to_100():
    for counts in [(7, 5, 3), (1, 2, 4), (99, 1, 1), (2, 0, 1)]:
        assert sum(report_rates(recs(*counts)).values()) == 100


def test_rates_require_records():
    with pytest.raises(DataError):
        report_rates([])


def test_bad_label_rejected():
    with pytest.raises(DataError, match="unknown audit label"):
        AuditRecord("p", "Great")


def test_sample_whole_dataset_in_order():
    data = list(range(10))
    assert sample_for_audit(data, 10, seed=1) == data


def test_sample_reproducible_and_seed_sensitive():
    data = list(range(10000))
    a = sample_for_audit(data, 100, seed=5)
    b = sample_for_audit(data, 100, seed=5)
    c = sample_for_audit(data, 100, seed=6)
    assert a == b
    assert a != c
    assert len(a) == 100


def test_sample_too_large():
    with pytest.raises(DataError, match="cannot sample"):
        sample_for_audit([1, 2], 3, seed=0)


def test_audit_tsv_roundtrip(tmp_path):
    rows = [("a#0-1::b#0-1", "source text", "target text"),
            ("a#1-2::b#1-2", "more source", "more target")]
    path = tmp_path / "audit.tsv"
    write_audit_tsv(rows, str(path))
    text = path.read_text(encoding="utf-8")
    filled = text.replace("target text\t\t", "target text\tPerfect\tok") \
                 .replace("more target\t\t", "more target\tWrong\t")
    path.write_text(filled, encoding="utf-8")
    records = read_audit_tsv(str(path), annotator="me")
    assert [r.label for r in records] == ["Perfect", "Wrong"]
    assert records[0].note == "ok"
    assert records[0].annotator == "me"


def test_audit_tsv_missing_label(tmp_path):
    path = tmp_path / "audit.tsv"
    write_audit_tsv([("id", "s", "t")], str(path))
    with pytest.raises(DataError, match="missing label"):
        read_audit_tsv(str(path))
