"""Stage orchestration: each stage reads file artifacts and writes its own.

Artifact layout under output_dir:

    corpus_<lang>.jsonl      normalized corpora (ingest)
    windows_<lang>.tsv       window dumps (windows)
    windows_<lang>.mvec/.ids window embeddings (embed)
    pairs.tsv                candidate pairs (mine)
    clusters.jsonl           pair clusters (cluster)
    alignments.jsonl         filtered bead runs (align)
    dataset.tsv/.jsonl       final aligned pairs (export)
    manifest.json            config snapshot + seeds + input digests
"""

from __future__ import annotations

import hashlib
import io
import json
import os

import numpy as np

from . import __version__
from .alignment import (AlignedPair, align_region, default_ratio_bounds,
                        filter_alignment, ratio_filter, write_aligned_jsonl,
                        write_aligned_tsv)
from .clustering import cluster_pairs, read_clusters_jsonl, write_clusters_jsonl
from .corpus import CorpusStore, ingest_corpus, write_corpus
from .embedding import (ProviderConfig, embed_texts, load_matrix, read_ids,
                        store_matrix, write_ids)
from .errors import ConfigError, DataError
from .knn import CandidatePair, WindowRef, mine_pairs, read_pairs_tsv, write_pairs_tsv
from .windowing import Window, build_windows, read_windows_tsv, write_windows_tsv


def provider_from_config(cfg: dict) -> ProviderConfig:
    p = cfg["provider"]
    return ProviderConfig(kind=p["kind"], endpoint=p["endpoint"], path=p["path"],
                          batch_size=p["batch_size"], normalize=p["normalize"],
                          dim=p["dim"]).validate()


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(cfg: dict, out_dir: str, extra_inputs: list[str] = ()) -> str:
    digests = {}
    for path in sorted(set(list(cfg["corpora"].values()) + list(extra_inputs))):
        if os.path.exists(path):
            digests[path] = _sha256(path)
    manifest = {
        "config": cfg,
        "seeds": {
            "seed": cfg["seed"],
            "eval_seed": cfg["eval"]["seed"],
            "audit_seed": cfg["audit"]["seed"],
        },
        "input_digests": digests,
        "version": __version__,
    }
    path = os.path.join(out_dir, "manifest.json")
    with io.open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, ensure_ascii=False, sort_keys=True, indent=2)
        f.write("\n")
    return path


def _corpus_path(cfg: dict, lang: str) -> str:
    try:
        return cfg["corpora"][lang]
    except KeyError:
        raise ConfigError(f"no corpus configured for language {lang!r}")


def load_store(cfg: dict, lang: str) -> CorpusStore:
    path = _corpus_path(cfg, lang)
    if not os.path.exists(path):
        raise ConfigError(f"corpus file not found: {path}")
    return ingest_corpus(path, lang)


def resolve_window_source(cfg: dict, store: CorpusStore) -> str:
    src = cfg["windowing"]["source"]
    if src != "auto":
        return src
    docs = list(store)
    if docs and all(d.pivot is not None for d in docs):
        return "pivot"
    return "original"


def corpus_windows(cfg: dict, store: CorpusStore) -> list[Window]:
    source = resolve_window_source(cfg, store)
    w = cfg["windowing"]
    out = []
    for doc in store:
        out.extend(build_windows(doc, source=source,
                                 min_len=w["min_len"], stride=w["stride"]))
    return out


def _out(cfg: dict, name: str) -> str:
    return os.path.join(cfg["output_dir"], name)


def _mining_langs(cfg: dict) -> tuple[str, str]:
    src, tgt = cfg["source_lang"], cfg["target_lang"]
    if not src or not tgt:
        raise ConfigError("source_lang and target_lang must be set for mining")
    return src, tgt


def stage_ingest(cfg: dict) -> dict:
    os.makedirs(cfg["output_dir"], exist_ok=True)
    counts = {}
    for lang in sorted(cfg["corpora"]):
        store = load_store(cfg, lang)
        write_corpus(store, _out(cfg, f"corpus_{lang}.jsonl"))
        counts[lang] = {"docs": len(store), "sentences": store.total_sentences()}
    write_manifest(cfg, cfg["output_dir"])
    return counts


def stage_windows(cfg: dict) -> dict:
    os.makedirs(cfg["output_dir"], exist_ok=True)
    counts = {}
    for lang in sorted(cfg["corpora"]):
        store = load_store(cfg, lang)
        windows = corpus_windows(cfg, store)
        write_windows_tsv(windows, _out(cfg, f"windows_{lang}.tsv"))
        counts[lang] = len(windows)
    write_manifest(cfg, cfg["output_dir"])
    return counts


def _load_windows(cfg: dict, lang: str) -> list[Window]:
    """Reconstruct Window objects (with text) from the TSV dump + corpus."""
    path = _out(cfg, f"windows_{lang}.tsv")
    if not os.path.exists(path):
        raise ConfigError(f"windows artifact not found: {path}; run `windows` first")
    store = load_store(cfg, lang)
    source = resolve_window_source(cfg, store)
    min_len = cfg["windowing"]["min_len"]
    windows = []
    for doc_id, position, start, end, char_len in read_windows_tsv(path):
        doc = store.docs.get(doc_id)
        if doc is None:
            raise DataError(f"{path}: unknown doc_id {doc_id}")
        texts = doc.pivot if source == "pivot" else doc.texts()
        if end >= len(texts):
            raise DataError(f"{path}: window {doc_id}:{position} out of range")
        text = " ".join(texts[start:end + 1])
        if len(text) != char_len:
            raise DataError(f"{path}: window {doc_id}:{position} char_len "
                            f"mismatch: corpus gives {len(text)}, dump says {char_len}")
        windows.append(Window(doc_id, position, start, end, text,
                              short=len(text) < min_len))
    return windows


def stage_embed(cfg: dict) -> dict:
    provider = provider_from_config(cfg)
    counts = {}
    for lang in sorted(cfg["corpora"]):
        windows = _load_windows(cfg, lang)
        mat = embed_texts(provider, [w.text for w in windows]) if windows \
            else np.zeros((0, provider.dim), dtype=np.float32)
        store_matrix(mat, _out(cfg, f"windows_{lang}.mvec"))
        write_ids([f"{w.doc_id}#{w.position}" for w in windows],
                  _out(cfg, f"windows_{lang}.mvec.ids"))
        counts[lang] = mat.shape[0]
    write_manifest(cfg, cfg["output_dir"])
    return counts


def _load_embedded(cfg: dict, lang: str) -> tuple[list[Window], np.ndarray]:
    mvec = _out(cfg, f"windows_{lang}.mvec")
    if not os.path.exists(mvec):
        raise ConfigError(f"embedding artifact not found: {mvec}; run `embed` first")
    windows = _load_windows(cfg, lang)
    mat = load_matrix(mvec)
    ids = read_ids(mvec + ".ids")
    expect = [f"{w.doc_id}#{w.position}" for w in windows]
    if ids != expect:
        raise DataError(f"{mvec}: ids sidecar does not match the window dump")
    return windows, mat


def stage_mine(cfg: dict) -> int:
    src_lang, tgt_lang = _mining_langs(cfg)
    src_windows, src_mat = _load_embedded(cfg, src_lang)
    tgt_windows, tgt_mat = _load_embedded(cfg, tgt_lang)
    m = cfg["mining"]
    threads = cfg["threads"] or (os.cpu_count() or 1)
    pairs = mine_pairs(src_windows, src_mat, tgt_windows, tgt_mat,
                       k=m["k"], min_sim=m["min_sim"], symmetric=m["symmetric"],
                       exclude_same_doc=(src_lang == tgt_lang), threads=threads)
    write_pairs_tsv(pairs, _out(cfg, "pairs.tsv"))
    write_manifest(cfg, cfg["output_dir"])
    return len(pairs)


def stage_cluster(cfg: dict) -> int:
    path = _out(cfg, "pairs.tsv")
    if not os.path.exists(path):
        raise ConfigError(f"pairs artifact not found: {path}; run `mine` first")
    pairs = [CandidatePair(WindowRef(sd, sp, -1), WindowRef(td, tp, -1), sim)
             for sd, sp, td, tp, sim in read_pairs_tsv(path)]
    c = cfg["clustering"]
    clusters = cluster_pairs(pairs, cell_size=c["cell_size"],
                             min_cluster_size=c["min_cluster_size"])
    write_clusters_jsonl(clusters, _out(cfg, "clusters.jsonl"))
    write_manifest(cfg, cfg["output_dir"])
    return len(clusters)


def _window_spans(cfg: dict, lang: str) -> dict[str, list[tuple[int, int]]]:
    """doc_id -> sentence (start, end) per window position, from the dump."""
    path = _out(cfg, f"windows_{lang}.tsv")
    if not os.path.exists(path):
        raise ConfigError(f"windows artifact not found: {path}; run `windows` first")
    spans: dict[str, list[tuple[int, int]]] = {}
    for doc_id, position, start, end, _ in read_windows_tsv(path):
        lst = spans.setdefault(doc_id, [])
        if position != len(lst):
            raise DataError(f"{path}: window positions for {doc_id} not contiguous")
        lst.append((start, end))
    return spans


def stage_align(cfg: dict) -> int:
    cpath = _out(cfg, "clusters.jsonl")
    if not os.path.exists(cpath):
        raise ConfigError(f"clusters artifact not found: {cpath}; run `cluster` first")
    src_lang, tgt_lang = _mining_langs(cfg)
    src_store = load_store(cfg, src_lang)
    tgt_store = load_store(cfg, tgt_lang)
    src_spans = _window_spans(cfg, src_lang)
    tgt_spans = _window_spans(cfg, tgt_lang)
    provider = provider_from_config(cfg)
    a = cfg["alignment"]

    records = []
    for cid, cl in enumerate(read_clusters_jsonl(cpath)):
        sdoc = src_store.docs.get(cl["src_doc"])
        tdoc = tgt_store.docs.get(cl["tgt_doc"])
        if sdoc is None or tdoc is None:
            raise DataError(f"cluster {cid}: unknown document "
                            f"{cl['src_doc']!r}/{cl['tgt_doc']!r}")
        sx0, sx1 = cl["x_range"]
        ty0, ty1 = cl["y_range"]
        swins = src_spans[cl["src_doc"]]
        twins = tgt_spans[cl["tgt_doc"]]
        s_lo, s_hi = swins[sx0][0], swins[sx1][1]
        t_lo, t_hi = twins[ty0][0], twins[ty1][1]
        src_sents = [s.text for s in sdoc.sentences[s_lo:s_hi + 1]]
        tgt_sents = [s.text for s in tdoc.sentences[t_lo:t_hi + 1]]
        beads = align_region(src_sents, tgt_sents, provider,
                             gap_penalty=a["gap_penalty"],
                             region_cap=a["region_cap"])
        runs = filter_alignment(beads, ma_window=a["ma_window"],
                                threshold=a["threshold"])
        for run_idx, run in enumerate(runs):
            records.append({
                "cluster": cid,
                "run": run_idx,
                "src_doc": cl["src_doc"],
                "tgt_doc": cl["tgt_doc"],
                "beads": [{
                    "src_span": [b.src_span[0] + s_lo, b.src_span[1] + s_lo],
                    "tgt_span": [b.tgt_span[0] + t_lo, b.tgt_span[1] + t_lo],
                    "score": round(b.score, 6),
                } for b in run],
            })
    with io.open(_out(cfg, "alignments.jsonl"), "w", encoding="utf-8",
                 newline="\n") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    write_manifest(cfg, cfg["output_dir"])
    return len(records)


def stage_export(cfg: dict) -> int:
    apath = _out(cfg, "alignments.jsonl")
    if not os.path.exists(apath):
        raise ConfigError(f"alignments artifact not found: {apath}; run `align` first")
    src_lang, tgt_lang = _mining_langs(cfg)
    src_store = load_store(cfg, src_lang)
    tgt_store = load_store(cfg, tgt_lang)
    bounds = cfg["alignment"]["ratio_bounds"]
    bounds = tuple(bounds) if bounds else default_ratio_bounds(src_lang, tgt_lang)

    best: dict[tuple, AlignedPair] = {}
    with io.open(apath, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            sdoc = src_store.docs[rec["src_doc"]]
            tdoc = tgt_store.docs[rec["tgt_doc"]]
            for b in rec["beads"]:
                sa, sb = b["src_span"]
                ta, tb = b["tgt_span"]
                if sa == sb or ta == tb:
                    continue  # gap bead
                pair = AlignedPair(
                    src_doc=rec["src_doc"], src_span=(sa, sb),
                    src_text=" ".join(s.text for s in sdoc.sentences[sa:sb]),
                    tgt_doc=rec["tgt_doc"], tgt_span=(ta, tb),
                    tgt_text=" ".join(s.text for s in tdoc.sentences[ta:tb]),
                    score=b["score"], cluster_id=rec["cluster"])
                key = (pair.src_doc, pair.src_span, pair.tgt_doc, pair.tgt_span)
                if key not in best or pair.score > best[key].score:
                    best[key] = pair

    kept = []
    for key in sorted(best):
        pair = best[key]
        keep, _ = ratio_filter(pair, bounds)
        if keep:
            kept.append(pair)
    write_aligned_tsv(kept, _out(cfg, "dataset.tsv"))
    write_aligned_jsonl(kept, _out(cfg, "dataset.jsonl"))
    write_manifest(cfg, cfg["output_dir"])
    return len(kept)


def mine_all(cfg: dict) -> dict:
    """Chain windows -> embed -> mine -> cluster -> align -> export."""
    os.makedirs(cfg["output_dir"], exist_ok=True)
    result = {
        "windows": stage_windows(cfg),
        "embedded": stage_embed(cfg),
        "pairs": stage_mine(cfg),
        "clusters": stage_cluster(cfg),
        "alignment_runs": stage_align(cfg),
        "exported_pairs": stage_export(cfg),
    }
    return result
