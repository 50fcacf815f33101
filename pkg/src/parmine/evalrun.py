"""Evaluation and audit runs driven by the pipeline configuration."""

from __future__ import annotations

import io
import json
import os

from .audit import (read_audit_tsv, report_rates, sample_for_audit,
                    write_audit_tsv)
from .corpus import SegmentId
from .embedding import embed_texts
from .errors import ConfigError, DataError
from .pipeline import load_store, provider_from_config, write_manifest
from .retrieval import (EvalTask, PoolItem, bm25_build, bm25_rank, dense_rank,
                        load_task_jsonl, metrics_row, precision_at_k,
                        sample_negatives, tokenize_for_bm25)


def build_pool_corpora(cfg: dict) -> dict[str, list[PoolItem]]:
    corpora: dict[str, list[PoolItem]] = {}
    for lang in sorted(cfg["corpora"]):
        store = load_store(cfg, lang)
        items = []
        for doc in store:
            for s in doc.sentences:
                pivot = doc.pivot[s.index] if doc.pivot else None
                items.append(PoolItem(SegmentId(doc.doc_id, s.index),
                                      s.text, lang, pivot))
        corpora[lang] = items
    return corpora


def _gold_items(task: EvalTask, corpora: dict[str, list[PoolItem]]) -> list[PoolItem]:
    by_seg = {item.seg: item for items in corpora.values() for item in items}
    golds = []
    for q in task.queries:
        item = by_seg.get(q.gold)
        if item is None:
            raise DataError(f"gold target {q.gold} not found in any corpus")
        golds.append(item)
    return golds


def _rank_bm25(task: EvalTask, pool: list[PoolItem], use_pivot: bool) -> dict:
    docs = []
    for item in pool:
        if use_pivot:
            if item.pivot is None:
                raise DataError(f"pool item {item.seg} has no pivot translation")
            docs.append(tokenize_for_bm25(item.pivot, "en"))
        else:
            docs.append(tokenize_for_bm25(item.text, item.lang))
    index = bm25_build(docs)
    rankings = {}
    for qid, q in enumerate(task.queries):
        qlang = "en" if use_pivot else q.lang
        ranked = bm25_rank(index, tokenize_for_bm25(q.text, qlang))
        rankings[qid] = [str(pool[i].seg) for i in ranked]
    return rankings


def _rank_dense(task: EvalTask, pool: list[PoolItem], cfg: dict,
                use_pivot: bool) -> dict:
    provider = provider_from_config(cfg)
    texts = []
    for item in pool:
        if use_pivot:
            if item.pivot is None:
                raise DataError(f"pool item {item.seg} has no pivot translation")
            texts.append(item.pivot)
        else:
            texts.append(item.text)
    mat = embed_texts(provider, texts)
    queries = embed_texts(provider, [q.text for q in task.queries])
    rankings = {}
    for qid in range(len(task.queries)):
        ranked = dense_rank(queries[qid], mat)
        rankings[qid] = [str(pool[i].seg) for i in ranked]
    return rankings


def run_eval(cfg: dict) -> list[tuple[str, str, str]]:
    """Run every configured strategy; returns (task, strategy, P@k row)."""
    e = cfg["eval"]
    if not e["task"]:
        raise ConfigError("eval.task must point to a task JSONL file")
    if not os.path.exists(e["task"]):
        raise ConfigError(f"task file not found: {e['task']}")
    task = load_task_jsonl(e["task"],
                           name=os.path.splitext(os.path.basename(e["task"]))[0])
    corpora = build_pool_corpora(cfg)
    if not corpora:
        raise ConfigError("eval requires at least one configured corpus")
    weights = e["weights"]
    if weights is None:
        weights = {lang: 1.0 / len(corpora) for lang in corpora}
    golds = _gold_items(task, corpora)
    pool = sample_negatives(corpora, e["pool_total"], weights, e["seed"],
                            golds=golds)

    golds_by_qid = {qid: str(q.gold) for qid, q in enumerate(task.queries)}
    rows = []
    for strategy in e["strategies"]:
        use_pivot = e["use_pivot"] or strategy.endswith("-pivot")
        if strategy.startswith("bm25"):
            rankings = _rank_bm25(task, pool, use_pivot)
        else:
            rankings = _rank_dense(task, pool, cfg, use_pivot)
        metrics = precision_at_k(rankings, golds_by_qid)
        rows.append((task.name, strategy, metrics_row(metrics)))

    os.makedirs(cfg["output_dir"], exist_ok=True)
    with io.open(os.path.join(cfg["output_dir"], "report.tsv"), "w",
                 encoding="utf-8", newline="\n") as f:
        f.write("task\tstrategy\tP@1\tP@5\tP@10\n")
        for name, strategy, row in rows:
            f.write(f"{name}\t{strategy}\t" + "\t".join(row.split("·")) + "\n")
    write_manifest(cfg, cfg["output_dir"], extra_inputs=[e["task"]])
    return rows


def run_audit_sample(cfg: dict) -> str:
    a = cfg["audit"]
    if not a["dataset"]:
        raise ConfigError("audit.dataset must point to a dataset JSONL file")
    if not os.path.exists(a["dataset"]):
        raise ConfigError(f"dataset file not found: {a['dataset']}")
    pairs = []
    with io.open(a["dataset"], "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{a['dataset']}:{lineno}: malformed JSON: {e.msg}")
            pair_id = (f"{rec['src_doc']}#{rec['src_span'][0]}-{rec['src_span'][1]}"
                       f"::{rec['tgt_doc']}#{rec['tgt_span'][0]}-{rec['tgt_span'][1]}")
            pairs.append((pair_id, rec["src_text"], rec["tgt_text"]))
    # stable sample under re-ordering: sort by pair id before sampling
    pairs.sort(key=lambda p: p[0])
    sample = sample_for_audit(pairs, a["n"], a["seed"])
    os.makedirs(cfg["output_dir"], exist_ok=True)
    out = os.path.join(cfg["output_dir"], "audit_sample.tsv")
    write_audit_tsv(sample, out)
    write_manifest(cfg, cfg["output_dir"], extra_inputs=[a["dataset"]])
    return out


def run_audit_report(cfg: dict, labels_path: str) -> dict[str, int]:
    if not os.path.exists(labels_path):
        raise ConfigError(f"labels file not found: {labels_path}")
    records = read_audit_tsv(labels_path)
    rates = report_rates(records)
    os.makedirs(cfg["output_dir"], exist_ok=True)
    out = os.path.join(cfg["output_dir"], "audit_report.json")
    with io.open(out, "w", encoding="utf-8", newline="\n") as f:
        json.dump(rates, f, sort_keys=True, indent=2)
        f.write("\n")
    write_manifest(cfg, cfg["output_dir"], extra_inputs=[labels_path])
    return rates
