"""Embedding backends and server settings.

The mock backend implements the frozen hashed character-3-gram scheme:
texts are padded with STX/ETX sentinels, every 3-gram of the padded string
is hashed with 64-bit FNV-1a (offset basis 0xcbf29ce484222325, prime
0x100000001b3) and bucketed modulo dim; counts are held in float32 and the
L2 norm is accumulated in float64 before the final float32 cast. Any
conforming client-side implementation produces byte-identical rows, which
is what makes the sidecar swappable for an in-process embedder in tests.

A real model would be loaded from MODEL_PATH; this build only knows how to
serve the mock, so any other MODEL_PATH leaves the backend unloaded and
/v1/embed answers 503.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1

MOCK_MODEL_NAME = "mock-3gram"
MOCK_DIM = 256

# mock translation: English-pivot echo; anything else is unsupported
TRANSLATE_TARGET = "en"


def _fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET_BASIS
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _U64
    return h


def mock_embed_rows(texts: list[str], dim: int = MOCK_DIM,
                    normalize: bool = True) -> np.ndarray:
    out = np.zeros((len(texts), dim), dtype=np.float32)
    for row, text in enumerate(texts):
        padded = "\x02" + text + "\x03"
        counts = np.zeros(dim, dtype=np.float32)
        for i in range(len(padded) - 2):
            gram = padded[i:i + 3].encode("utf-8")
            counts[_fnv1a64(gram) % dim] += 1.0
        if normalize:
            c64 = counts.astype(np.float64)
            out[row] = (c64 / np.linalg.norm(c64)).astype(np.float32)
        else:
            out[row] = counts
    return out


@dataclass
class Settings:
    model_path: str = ""
    device: str = "cpu"
    max_batch: int = 256
    port: int = 8021

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            model_path=os.environ.get("MODEL_PATH", ""),
            device=os.environ.get("DEVICE", "cpu"),
            max_batch=int(os.environ.get("MAX_BATCH", "256")),
            port=int(os.environ.get("PORT", "8021")),
        )


class Backend:
    """The loaded (or not) embedding model."""

    def __init__(self, settings: Settings):
        self.settings = settings
        self.is_mock = settings.model_path in ("", "mock")
        self.loaded = self.is_mock  # no real-model loader in this build
        self.name = MOCK_MODEL_NAME if self.is_mock else settings.model_path
        self.dim = MOCK_DIM

    def embed(self, texts: list[str], normalize: bool) -> np.ndarray:
        return mock_embed_rows(texts, dim=self.dim, normalize=normalize)

    def translate(self, texts: list[str], src_lang: str,
                  tgt_lang: str) -> list[str] | None:
        """Mock pivot translation (echo). None means unsupported pair."""
        if tgt_lang != TRANSLATE_TARGET:
            return None
        return list(texts)
