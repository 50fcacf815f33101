import json
import random
import string

import pytest


def _random_word(rng):
    return "".join(rng.choice(string.ascii_lowercase)
                   for _ in range(rng.randint(4, 9)))


def _random_sentence(rng, vocab):
    return " ".join(rng.choice(vocab) for _ in range(rng.randint(6, 10)))


def _noisy_copy(rng, text, rate):
    out = []
    for ch in text:
        if ch != " " and rng.random() < rate:
            out.append(rng.choice(string.ascii_lowercase))
        else:
            out.append(ch)
    return "".join(out)


def make_planted_corpora(out_dir, n_sentences=10000, sents_per_doc=200,
                         n_regions=20, region_len=(10, 40), noise=0.06,
                         seed=20240801):
    """Two synthetic corpora with planted noisy parallel regions.

    Returns (src_path, tgt_path, planted) where planted is the set of
    (src_doc, src_idx, tgt_doc, tgt_idx) sentence pairs.
    """
    rng = random.Random(seed)
    vocab = [_random_word(rng) for _ in range(600)]
    n_docs = n_sentences // sents_per_doc

    def fresh_corpus(prefix):
        return {f"{prefix}{d:03d}": [_random_sentence(rng, vocab)
                                     for _ in range(sents_per_doc)]
                for d in range(n_docs)}

    corpus_a = fresh_corpus("a")
    corpus_b = fresh_corpus("b")
    used_a = {d: [] for d in corpus_a}
    used_b = {d: [] for d in corpus_b}

    def reserve(used, doc_ids, length):
        for _ in range(1000):
            doc = rng.choice(doc_ids)
            start = rng.randrange(0, sents_per_doc - length)
            if all(start + length <= lo or start >= hi
                   for lo, hi in used[doc]):
                used[doc].append((start, start + length))
                return doc, start
        raise RuntimeError("could not place region")

    planted = set()
    for _ in range(n_regions):
        length = rng.randint(*region_len)
        a_doc, a_start = reserve(used_a, sorted(corpus_a), length)
        b_doc, b_start = reserve(used_b, sorted(corpus_b), length)
        for i in range(length):
            src_text = corpus_a[a_doc][a_start + i]
            corpus_b[b_doc][b_start + i] = _noisy_copy(rng, src_text, noise)
            planted.add((a_doc, a_start + i, b_doc, b_start + i))

    src_path = out_dir / "corpus_src.jsonl"
    tgt_path = out_dir / "corpus_tgt.jsonl"
    for path, corpus, lang in ((src_path, corpus_a, "sa"),
                               (tgt_path, corpus_b, "bo")):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for doc_id in sorted(corpus):
                f.write(json.dumps({"doc_id": doc_id, "lang": lang,
                                    "sentences": corpus[doc_id]},
                                   ensure_ascii=False) + "\n")
    return src_path, tgt_path, planted


def planted_config(out_dir, src_path, tgt_path, run_dir, threads=1):
    return {
        "corpora": {"sa": str(src_path), "bo": str(tgt_path)},
        "source_lang": "sa",
        "target_lang": "bo",
        "provider": {"kind": "mock", "dim": 256},
        "windowing": {"min_len": 80, "stride": 1, "source": "original"},
        "mining": {"k": 5, "min_sim": 0.6, "symmetric": False},
        "clustering": {"cell_size": 10, "min_cluster_size": 3},
        "alignment": {"gap_penalty": 0.15, "ma_window": 3, "threshold": 0.5,
                      "region_cap": 512, "ratio_bounds": [0.33, 3.0]},
        "seed": 7,
        "threads": threads,
        "output_dir": str(run_dir),
    }


@pytest.fixture(scope="session")
def small_planted(tmp_path_factory):
    """Desk-size planted fixture for CLI tests (fast)."""
    base = tmp_path_factory.mktemp("small_planted")
    src, tgt, planted = make_planted_corpora(
        base, n_sentences=600, sents_per_doc=100, n_regions=4,
        region_len=(8, 15), noise=0.05, seed=99)
    return base, src, tgt, planted
