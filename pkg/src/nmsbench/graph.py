"""The suppression graph: arcs from each box to the lower-priority boxes it can suppress.

This module is the ground-truth side of every equivalence check. Graph
construction is the plain quadratic scan; the dynamic program walks a
topological order and pushes "suppressed by a kept predecessor" forward.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from nmsbench import _kernels
from nmsbench.detections import DetectionSet, KeepMask, priority_order


class CycleError(ValueError):
    pass


@dataclass(frozen=True)
class SuppressionGraph:
    node_count: int
    src: np.ndarray
    dst: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "src", np.asarray(self.src, dtype=np.int64))
        object.__setattr__(self, "dst", np.asarray(self.dst, dtype=np.int64))

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> "SuppressionGraph":
        arcs = list(arcs)
        src = np.array([a for a, _ in arcs], dtype=np.int64)
        dst = np.array([b for _, b in arcs], dtype=np.int64)
        return cls(n, src, dst)

    @property
    def arc_count(self) -> int:
        return len(self.src)

    @property
    def arcs(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in range(self.node_count)]
        for v, u in zip(self.src.tolist(), self.dst.tolist()):
            succ[v].append(u)
        return succ

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.node_count).astype(np.int64)

    def induced(self, nodes: Sequence[int]) -> tuple["SuppressionGraph", np.ndarray]:
        """Subgraph on ``nodes`` relabelled 0..k-1, plus the old labels."""
        nodes = np.asarray(sorted(nodes), dtype=np.int64)
        relabel = -np.ones(self.node_count, dtype=np.int64)
        relabel[nodes] = np.arange(len(nodes))
        keep = (relabel[self.src] >= 0) & (relabel[self.dst] >= 0)
        return SuppressionGraph(len(nodes), relabel[self.src[keep]], relabel[self.dst[keep]]), nodes


def build_graph(dets: DetectionSet, iou_threshold: float) -> SuppressionGraph:
    """Every pair, tested once, in priority order; arc from the higher-priority box."""
    order = priority_order(dets.scores)
    src, dst, _ = _kernels.arcs_kernel(dets.boxes, order, float(iou_threshold))
    return SuppressionGraph(len(dets), src, dst)


def topological_order(g: SuppressionGraph, method: str = "kahn") -> list[int]:
    """A topological order of ``g``; ``"kahn"`` (FIFO) or ``"dfs"`` (reverse postorder)."""
    succ = g.successors()
    n = g.node_count
    if method == "kahn":
        indeg = g.in_degree().tolist()
        queue = [v for v in range(n) if indeg[v] == 0]
        out = []
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            out.append(v)
            for u in succ[v]:
                indeg[u] -= 1
                if indeg[u] == 0:
                    queue.append(u)
        if len(out) != n:
            raise CycleError("graph has a cycle")
        return out
    if method == "dfs":
        state = [0] * n  # 0 new, 1 on stack, 2 done
        post = []
        for s in range(n - 1, -1, -1):
            if state[s]:
                continue
            stack = [(s, iter(succ[s]))]
            state[s] = 1
            while stack:
                v, it = stack[-1]
                for u in it:
                    if state[u] == 1:
                        raise CycleError("graph has a cycle")
                    if state[u] == 0:
                        state[u] = 1
                        stack.append((u, iter(succ[u])))
                        break
                else:
                    state[v] = 2
                    post.append(v)
                    stack.pop()
        return post[::-1]
    raise ValueError(f"unknown topological order method {method!r}")


def find_cycle(g: SuppressionGraph) -> list[int] | None:
    """Some directed cycle as a node list, or None for a DAG."""
    succ = g.successors()
    n = g.node_count
    state = [0] * n
    parent = [-1] * n
    for s in range(n):
        if state[s]:
            continue
        stack = [(s, iter(succ[s]))]
        state[s] = 1
        while stack:
            v, it = stack[-1]
            for u in it:
                if state[u] == 1:
                    cycle = [u]
                    w = v
                    while w != u:
                        cycle.append(w)
                        w = parent[w]
                    return cycle[::-1]
                if state[u] == 0:
                    state[u] = 1
                    parent[u] = v
                    stack.append((u, iter(succ[u])))
                    break
            else:
                state[v] = 2
                stack.pop()
    return None


def topo_dp(g: SuppressionGraph, order: Sequence[int] | None = None) -> KeepMask:
    """Keep a node iff none of its predecessors is kept.

    ``order`` may be any topological order; it defaults to Kahn's. A supplied
    order is checked, and a cycle raises :class:`CycleError`.
    """
    if order is None:
        order = topological_order(g)
    else:
        pos = np.full(g.node_count, -1, dtype=np.int64)
        pos[np.asarray(order, dtype=np.int64)] = np.arange(len(order))
        if len(order) != g.node_count or np.any(pos < 0):
            raise ValueError("order must be a permutation of the nodes")
        if np.any(pos[g.src] >= pos[g.dst]):
            raise ValueError("order is not topological")
    succ = g.successors()
    keep = [True] * g.node_count
    for v in order:
        if keep[v]:
            for u in succ[v]:
                keep[u] = False
    return np.array(keep, dtype=bool)


@dataclass(frozen=True)
class WccStats:
    component_id: np.ndarray
    component_sizes: list[int]
    wcc_count: int
    arc_count: int
    node_count: int

    def size_histogram(self) -> Counter:
        return Counter(self.component_sizes)

    def members(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.component_id == c) for c in range(self.wcc_count)]


def wcc(g: SuppressionGraph) -> WccStats:
    n = g.node_count
    if n == 0:
        return WccStats(np.zeros(0, dtype=np.int64), [], 0, 0, 0)
    adj = coo_matrix((np.ones(g.arc_count), (g.src, g.dst)), shape=(n, n))
    count, labels = connected_components(adj, directed=True, connection="weak")
    sizes = np.bincount(labels, minlength=count).tolist()
    return WccStats(labels.astype(np.int64), sizes, int(count), g.arc_count, n)


@dataclass(frozen=True)
class GraphStatsRow:
    image_id: str
    nodes: int
    arcs: int
    wccs: int
    sizes: Counter


def image_graph_stats(dets: DetectionSet, iou_threshold: float) -> GraphStatsRow:
    stats = wcc(build_graph(dets, iou_threshold))
    return GraphStatsRow(
        dets.image_id, stats.node_count, stats.arc_count, stats.wcc_count, stats.size_histogram()
    )


def graph_stats_report(
    sets: Iterable[DetectionSet], iou_threshold: float
) -> tuple[list[GraphStatsRow], Counter]:
    """Per-image (|V|, |E|, |W|) rows and the aggregate WCC size histogram."""
    rows = []
    hist: Counter = Counter()
    for dets in sets:
        row = image_graph_stats(dets, iou_threshold)
        rows.append(row)
        hist.update(row.sizes)
    return rows, hist


def histogram_quantile(hist: Counter, q: float) -> float:
    """Lower ``q``-quantile of the sizes in a ``{size: count}`` histogram."""
    total = sum(hist.values())
    if total == 0:
        return float("nan")
    target = q * total
    seen = 0
    for size in sorted(hist):
        seen += hist[size]
        if seen >= target:
            return float(size)
    return float(max(hist))


def fraction_below(hist: Counter, bound: int) -> float:
    total = sum(hist.values())
    return sum(c for s, c in hist.items() if s < bound) / total if total else float("nan")


def write_stats_csv(rows: Iterable[GraphStatsRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["image_id", "nodes", "arcs", "wccs"])
        for r in rows:
            w.writerow([r.image_id, r.nodes, r.arcs, r.wccs])


def write_histogram_csv(hist: Counter, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["wcc_size", "count"])
        for size in sorted(hist):
            w.writerow([size, hist[size]])
