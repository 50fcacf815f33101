"""Spatial-hash clustering of candidate pairs into contiguous regions.

Each (x, y) window-position pair is hashed to a grid cell; points whose
cells are identical or 8-neighbors are connected, and clusters are the
connected components within one (source doc, target doc) plane. Components
below min_cluster_size are discarded.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

from .errors import DataError
from .knn import CandidatePair

DEFAULT_CELL_SIZE = 10
DEFAULT_MIN_CLUSTER_SIZE = 3


@dataclass(frozen=True, slots=True)
class PairPoint:
    x: int
    y: int
    sim: float


@dataclass
class Cluster:
    src_doc: str
    tgt_doc: str
    points: list[PairPoint]
    x_range: tuple[int, int]  # inclusive
    y_range: tuple[int, int]
    mean_sim: float


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _components(points: list[PairPoint], cell_size: int) -> list[list[int]]:
    cells: dict[tuple[int, int], list[int]] = {}
    for i, p in enumerate(points):
        cells.setdefault((p.x // cell_size, p.y // cell_size), []).append(i)
    uf = _UnionFind(len(points))
    for (cx, cy), members in cells.items():
        first = members[0]
        for m in members[1:]:
            uf.union(first, m)
        for dx in (0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy <= 0:
                    continue  # each unordered cell pair visited once
                other = cells.get((cx + dx, cy + dy))
                if other:
                    uf.union(first, other[0])
    groups: dict[int, list[int]] = {}
    for i in range(len(points)):
        groups.setdefault(uf.find(i), []).append(i)
    return list(groups.values())


def cluster_points(points: list[PairPoint], cell_size: int,
                   min_cluster_size: int) -> list[list[PairPoint]]:
    """Connected components of one document-pair plane, size-filtered."""
    if cell_size < 1:
        raise DataError(f"cell_size must be >= 1, got {cell_size}")
    if min_cluster_size < 1:
        raise DataError(f"min_cluster_size must be >= 1, got {min_cluster_size}")
    out = []
    for comp in _components(points, cell_size):
        if len(comp) >= min_cluster_size:
            out.append(sorted((points[i] for i in comp), key=lambda p: (p.x, p.y)))
    return out


def cluster_pairs(pairs: list[CandidatePair],
                  cell_size: int = DEFAULT_CELL_SIZE,
                  min_cluster_size: int = DEFAULT_MIN_CLUSTER_SIZE) -> list[Cluster]:
    """Cluster candidate pairs per (src_doc, tgt_doc) plane."""
    by_docpair: dict[tuple[str, str], list[PairPoint]] = {}
    for p in pairs:
        key = (p.src.doc_id, p.tgt.doc_id)
        by_docpair.setdefault(key, []).append(
            PairPoint(p.src.position, p.tgt.position, p.sim))
    clusters = []
    for (src_doc, tgt_doc), points in by_docpair.items():
        for members in cluster_points(points, cell_size, min_cluster_size):
            xs = [p.x for p in members]
            ys = [p.y for p in members]
            clusters.append(Cluster(
                src_doc=src_doc,
                tgt_doc=tgt_doc,
                points=members,
                x_range=(min(xs), max(xs)),
                y_range=(min(ys), max(ys)),
                mean_sim=sum(p.sim for p in members) / len(members),
            ))
    clusters.sort(key=lambda c: (c.src_doc, c.tgt_doc, c.x_range[0], c.y_range[0]))
    return clusters


def write_clusters_jsonl(clusters: list[Cluster], path: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as f:
        for c in clusters:
            f.write(json.dumps({
                "src_doc": c.src_doc,
                "tgt_doc": c.tgt_doc,
                "x_range": list(c.x_range),
                "y_range": list(c.y_range),
                "n_points": len(c.points),
                "mean_sim": round(c.mean_sim, 6),
            }, ensure_ascii=False) + "\n")


def read_clusters_jsonl(path: str) -> list[dict]:
    out = []
    with io.open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: malformed JSON: {e.msg}") from None
    return out
