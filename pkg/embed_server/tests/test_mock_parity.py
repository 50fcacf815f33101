"""Byte-compatibility of the server's mock embedder with the frozen scheme.

fixtures/mock_vectors.json holds float32 rows (hex) produced by an
independent implementation of the hashed-3-gram scheme; the server must
reproduce them bit for bit, both raw counts and normalized.
"""

import json
import pathlib

import numpy as np
from fastapi.testclient import TestClient

from embed_server.app import create_app
from embed_server.model import Settings, mock_embed_rows

FIXTURE = pathlib.Path(__file__).parent / "fixtures" / "mock_vectors.json"


def load_cases():
    return json.loads(FIXTURE.read_text(encoding="utf-8"))["cases"]


def test_backend_matches_fixture_bytes():
    for case in load_cases():
        norm = mock_embed_rows([case["text"]], dim=case["dim"],
                               normalize=True)[0]
        raw = mock_embed_rows([case["text"]], dim=case["dim"],
                              normalize=False)[0]
        assert norm.tobytes().hex() == case["normalized_hex"], case["text"]
        assert raw.tobytes().hex() == case["raw_hex"], case["text"]


def test_wire_roundtrip_preserves_bytes():
    """float32 -> JSON -> float32 must be exact, or clients diverge."""
    client = TestClient(create_app(Settings()))
    cases = load_cases()
    body = client.post("/v1/embed", json={
        "texts": [c["text"] for c in cases], "normalize": True}).json()
    for case, row in zip(cases, body["vectors"]):
        got = np.asarray(row, dtype=np.float32)
        assert got.tobytes().hex() == case["normalized_hex"], case["text"]
