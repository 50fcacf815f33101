"""Embedding providers, cosine similarity and the MVEC vector file format.

Three providers sit behind one interface:

  mock:   deterministic hashed character 3-grams (no model needed),
  file:   precomputed vectors looked up by sha256(text) in an MVEC file,
  remote: an HTTP sidecar speaking POST /v1/embed.

The mock provider pads each text with STX/ETX sentinels, hashes every
character 3-gram of the padded string with 64-bit FNV-1a (offset basis
0xcbf29ce484222325, prime 0x100000001b3) and buckets modulo dim, then
L2-normalizes. Counts are held in float32; the norm is accumulated in
float64. The scheme is frozen: any conforming implementation must produce
byte-identical float32 rows.
"""

from __future__ import annotations

import hashlib
import struct
import time
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ProviderError

MOCK_HASH_SEED = 0xCBF29CE484222325  # FNV-1a 64-bit offset basis
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

DEFAULT_DIM = 256

MVEC_MAGIC = b"MVEC"


def fnv1a64(data: bytes, seed: int = MOCK_HASH_SEED) -> int:
    h = seed
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _char_trigrams(text: str) -> list[str]:
    padded = "\x02" + text + "\x03"
    return [padded[i:i + 3] for i in range(len(padded) - 2)]


def mock_embed(texts: list[str], dim: int = DEFAULT_DIM,
               seed: int = MOCK_HASH_SEED, normalize: bool = True) -> np.ndarray:
    """Embed texts with the frozen hashed-3-gram scheme. Returns float32 rows."""
    if dim < 1:
        raise DataError(f"dim must be >= 1, got {dim}")
    out = np.zeros((len(texts), dim), dtype=np.float32)
    for i, text in enumerate(texts):
        if not text:
            raise DataError(f"cannot embed empty text at position {i}")
        counts = np.zeros(dim, dtype=np.float32)
        for gram in _char_trigrams(text):
            counts[fnv1a64(gram.encode("utf-8"), seed) % dim] += 1.0
        if normalize:
            norm = float(np.linalg.norm(counts.astype(np.float64)))
            out[i] = (counts.astype(np.float64) / norm).astype(np.float32)
        else:
            out[i] = counts
    return out


def cosine(a, b) -> float:
    """Cosine similarity with float64 accumulation. Errors on zero vectors."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DataError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DataError("cosine undefined for zero vector")
    return float(np.dot(a, b) / (na * nb))


def check_matrix(m: np.ndarray, normalized: bool = False) -> np.ndarray:
    m = np.asarray(m, dtype=np.float32)
    if m.ndim != 2:
        raise DataError(f"matrix must be 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise DataError("matrix contains NaN or Inf")
    if normalized:
        norms = np.linalg.norm(m.astype(np.float64), axis=1)
        bad = np.abs(norms - 1.0) > 1e-4
        if bad.any():
            raise DataError(f"row {int(np.argmax(bad))} is not unit-norm")
    return m


def store_matrix(m: np.ndarray, path: str) -> None:
    """Write an MVEC file: magic, u32 LE dim, u64 LE count, float32 LE rows."""
    m = check_matrix(m)
    count, dim = m.shape
    with open(path, "wb") as f:
        f.write(MVEC_MAGIC)
        f.write(struct.pack("<I", dim))
        f.write(struct.pack("<Q", count))
        f.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def load_matrix(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MVEC_MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}")
        header = f.read(12)
        if len(header) != 12:
            raise DataError(f"{path}: truncated header")
        dim, = struct.unpack("<I", header[:4])
        count, = struct.unpack("<Q", header[4:])
        payload = f.read()
    expected = count * dim * 4
    if len(payload) != expected:
        raise DataError(f"{path}: payload size mismatch: expected {expected} "
                        f"bytes for count={count} dim={dim}, got {len(payload)}")
    return np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()


def write_ids(ids: list[str], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i in ids:
            f.write(i + "\n")


def read_ids(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.strip()]


@dataclass
class ProviderConfig:
    kind: str = "mock"          # mock | file | remote
    endpoint: str | None = None  # remote
    path: str | None = None      # file (MVEC; sidecar ids at path + ".ids")
    batch_size: int = 64
    normalize: bool = True
    dim: int = DEFAULT_DIM

    def validate(self) -> "ProviderConfig":
        if self.kind not in ("mock", "file", "remote"):
            raise DataError(f"unknown provider kind: {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise DataError("remote provider requires an endpoint")
        if self.kind == "file" and not self.path:
            raise DataError("file provider requires a path")
        if self.batch_size < 1:
            raise DataError("batch_size must be >= 1")
        return self


def text_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _embed_file(cfg: ProviderConfig, texts: list[str]) -> np.ndarray:
    m = load_matrix(cfg.path)
    ids = read_ids(cfg.path + ".ids")
    if len(ids) != m.shape[0]:
        raise DataError(f"{cfg.path}: ids count {len(ids)} != row count {m.shape[0]}")
    lookup = {k: i for i, k in enumerate(ids)}
    rows = []
    for t in texts:
        k = text_key(t)
        if k not in lookup:
            raise ProviderError(f"file provider has no vector for text key {k}")
        rows.append(m[lookup[k]])
    return np.stack(rows) if rows else np.zeros((0, m.shape[1]), dtype=np.float32)


def _embed_remote(cfg: ProviderConfig, texts: list[str],
                  retries: int = 3, backoff: float = 0.25) -> np.ndarray:
    import requests

    url = cfg.endpoint.rstrip("/") + "/v1/embed"
    chunks = []
    dim = None
    for lo in range(0, len(texts), cfg.batch_size):
        batch = texts[lo:lo + cfg.batch_size]
        body = {"texts": batch, "normalize": cfg.normalize}
        last = None
        for attempt in range(retries):
            try:
                resp = requests.post(url, json=body, timeout=60)
                break
            except requests.RequestException as e:
                last = e
                time.sleep(backoff * (2 ** attempt))
        else:
            raise ProviderError(f"embed endpoint unreachable: {last}", retryable=True)
        if resp.status_code != 200:
            raise ProviderError(f"embed endpoint returned {resp.status_code}: "
                                f"{resp.text[:200]}",
                                retryable=resp.status_code in (429, 503))
        data = resp.json()
        vecs = np.asarray(data["vectors"], dtype=np.float32)
        if vecs.shape[0] != len(batch):
            raise ProviderError("embed response row count mismatch")
        if dim is None:
            dim = vecs.shape[1]
        elif vecs.shape[1] != dim:
            raise ProviderError(f"dimension mismatch across batches: "
                                f"{vecs.shape[1]} vs {dim}")
        chunks.append(vecs)
    if not chunks:
        return np.zeros((0, cfg.dim), dtype=np.float32)
    return np.concatenate(chunks, axis=0)


def embed_texts(cfg: ProviderConfig, texts: list[str]) -> np.ndarray:
    """Embed texts through the configured provider. Rows align with texts."""
    cfg.validate()
    for i, t in enumerate(texts):
        if not isinstance(t, str) or not t:
            raise DataError(f"cannot embed empty text at position {i}")
    if cfg.kind == "mock":
        m = mock_embed(texts, dim=cfg.dim, normalize=cfg.normalize)
    elif cfg.kind == "file":
        m = _embed_file(cfg, texts)
    else:
        m = _embed_remote(cfg, texts)
    return check_matrix(m, normalized=cfg.normalize)
