"""Manual quality audit: deterministic sampling, labels, rate reporting.

Labels are entered offline: the CLI emits an annotation TSV with blank label
cells, an annotator fills it in a spreadsheet, and audit-report re-ingests
it and prints integer percentages that sum to 100.
"""

from __future__ import annotations

import io
import random
from dataclasses import dataclass

from .errors import DataError

LABELS = ("Perfect", "PartlyCorrect", "Wrong")


@dataclass(frozen=True)
class AuditRecord:
    pair_id: str
    label: str
    annotator: str = ""
    note: str = ""

    def __post_init__(self):
        if self.label not in LABELS:
            raise DataError(f"unknown audit label: {self.label!r}")


def sample_for_audit(dataset, n: int, seed: int) -> list:
    """Reservoir-sample n items from a stream, reproducibly from seed.

    With n equal to the dataset size the whole dataset comes back in
    stream order.
    """
    if n < 1:
        raise DataError(f"sample size must be >= 1, got {n}")
    rng = random.Random(seed)
    reservoir = []
    seen = 0
    for item in dataset:
        seen += 1
        if len(reservoir) < n:
            reservoir.append(item)
        else:
            j = rng.randrange(seen)
            if j < n:
                reservoir[j] = item
    if seen < n:
        raise DataError(f"dataset has only {seen} items, cannot sample {n}")
    return reservoir


def report_rates(records: list[AuditRecord]) -> dict[str, int]:
    """Integer percentages per label, largest-remainder, summing to 100.

    Remainder ties go to the earlier label in LABELS order.
    """
    if not records:
        raise DataError("report_rates requires at least one record")
    counts = {lab: 0 for lab in LABELS}
    for r in records:
        counts[r.label] += 1
    total = len(records)
    shares = {lab: 100.0 * counts[lab] / total for lab in LABELS}
    pct = {lab: int(shares[lab]) for lab in LABELS}
    leftover = 100 - sum(pct.values())
    order = sorted(LABELS, key=lambda lab: (-(shares[lab] - pct[lab]),
                                            LABELS.index(lab)))
    for lab in order[:leftover]:
        pct[lab] += 1
    return pct


def write_audit_tsv(rows: list[tuple[str, str, str]], path: str) -> None:
    """Emit the annotation sheet: pair_id, src_text, tgt_text, label, note."""
    with io.open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("pair_id\tsrc_text\ttgt_text\tlabel\tnote\n")
        for pair_id, src_text, tgt_text in rows:
            f.write(f"{pair_id}\t{src_text}\t{tgt_text}\t\t\n")


def read_audit_tsv(path: str, annotator: str = "") -> list[AuditRecord]:
    records = []
    with io.open(path, "r", encoding="utf-8") as f:
        header = f.readline()
        if not header.startswith("pair_id\t"):
            raise DataError(f"{path}: not an audit TSV")
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 4:
                raise DataError(f"{path}:{lineno}: expected >= 4 columns")
            label = parts[3].strip()
            if not label:
                raise DataError(f"{path}:{lineno}: missing label")
            note = parts[4] if len(parts) > 4 else ""
            records.append(AuditRecord(parts[0], label, annotator, note))
    return records
