"""End-to-end: the mining CLI pointed at a live sidecar in mock mode must
produce byte-identical artifacts to its in-process mock provider.

The pipeline is driven purely through its external interfaces: the
`parmine` console script and corpus/config files on disk.
"""

import json
import os
import random
import shutil
import signal
import socket
import string
import subprocess
import sys
import time

import pytest
import requests

pytestmark = pytest.mark.skipif(shutil.which("parmine") is None,
                                reason="parmine CLI not installed")


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def sidecar():
    port = free_port()
    env = dict(os.environ, PORT=str(port), MAX_BATCH="256")
    proc = subprocess.Popen([sys.executable, "-m", "embed_server"], env=env)
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if requests.get(base + "/health", timeout=1).ok:
                    break
            except requests.RequestException:
                time.sleep(0.1)
        else:
            raise RuntimeError("sidecar did not come up")
        yield base
    finally:
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=10)


def make_corpora(tmp_path):
    rng = random.Random(1234)
    vocab = ["".join(rng.choice(string.ascii_lowercase) for _ in range(6))
             for _ in range(200)]

    def sent():
        return " ".join(rng.choice(vocab) for _ in range(8))

    docs_a = {f"a{d}": [sent() for _ in range(60)] for d in range(2)}
    docs_b = {f"b{d}": [sent() for _ in range(60)] for d in range(2)}
    for i in range(12):  # planted identical region a0[20:32] == b1[5:17]
        docs_b["b1"][5 + i] = docs_a["a0"][20 + i]

    paths = []
    for name, docs, lang in (("src.jsonl", docs_a, "sa"),
                             ("tgt.jsonl", docs_b, "bo")):
        p = tmp_path / name
        with open(p, "w", encoding="utf-8") as f:
            for doc_id in sorted(docs):
                f.write(json.dumps({"doc_id": doc_id, "lang": lang,
                                    "sentences": docs[doc_id]}) + "\n")
        paths.append(p)
    return paths


def mining_config(src, tgt, run_dir, provider):
    return {
        "corpora": {"sa": str(src), "bo": str(tgt)},
        "source_lang": "sa",
        "target_lang": "bo",
        "provider": provider,
        "windowing": {"min_len": 80, "stride": 1, "source": "original"},
        "mining": {"k": 5, "min_sim": 0.6, "symmetric": False},
        "clustering": {"cell_size": 10, "min_cluster_size": 3},
        "seed": 7,
        "threads": 1,
        "output_dir": str(run_dir),
    }


def run_mine_all(tmp_path, name, cfg):
    cfg_path = tmp_path / f"{name}.json"
    cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
    subprocess.run(["parmine", "mine-all", "--config", str(cfg_path)],
                   check=True, capture_output=True)


def artifacts(run_dir):
    return {p.name: p.read_bytes() for p in sorted(run_dir.iterdir())
            if p.name != "manifest.json"}


def test_remote_mock_equals_in_process_mock(tmp_path, sidecar):
    src, tgt = make_corpora(tmp_path)

    local_run = tmp_path / "local"
    run_mine_all(tmp_path, "local", mining_config(
        src, tgt, local_run, {"kind": "mock", "dim": 256}))

    remote_run = tmp_path / "remote"
    run_mine_all(tmp_path, "remote", mining_config(
        src, tgt, remote_run,
        {"kind": "remote", "endpoint": sidecar, "dim": 256}))

    local = artifacts(local_run)
    remote = artifacts(remote_run)
    assert local.keys() == remote.keys()
    assert local == remote

    # and the run actually mined the planted region
    dataset = (local_run / "dataset.jsonl").read_text(encoding="utf-8")
    assert dataset.strip(), "pipeline exported no pairs"
    assert '"a0"' in dataset and '"b1"' in dataset
