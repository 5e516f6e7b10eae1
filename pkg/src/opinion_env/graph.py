"""Undirected, unweighted agent networks and the neighbour-averaging map."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DuplicateEdge, IndexOutOfRange, IsolatedVertex, LengthMismatch, SelfLoop


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    degrees: tuple[int, ...]
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        # directed half-edge arrays, used by the vectorised averaging map
        src = np.array([i for i, j in self.edges] + [j for i, j in self.edges], dtype=np.intp)
        dst = np.array([j for i, j in self.edges] + [i for i, j in self.edges], dtype=np.intp)
        object.__setattr__(self, "_src", src)
        object.__setattr__(self, "_dst", dst)
        object.__setattr__(self, "_deg", np.asarray(self.degrees, dtype=float))

    def adjacency(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix (for inspection and tests only)."""
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


def build_graph(n: int, edges) -> Graph:
    """Validate an edge list and build a :class:`Graph`.

    Raises
    ------
    IndexOutOfRange, SelfLoop, DuplicateEdge, IsolatedVertex
    """
    if n < 1:
        raise IndexOutOfRange(f"n must be positive, got {n}")
    seen = set()
    clean = []
    nbrs = [[] for _ in range(n)]
    for e in edges:
        i, j = (int(v) for v in e)
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"edge ({i}, {j}) outside [0, {n})")
        if i == j:
            raise SelfLoop(f"self-loop at vertex {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}")
        seen.add(key)
        clean.append(key)
        nbrs[i].append(j)
        nbrs[j].append(i)
    for v in range(n):
        if not nbrs[v]:
            raise IsolatedVertex(v)
    return Graph(
        n=n,
        edges=tuple(clean),
        degrees=tuple(len(x) for x in nbrs),
        neighbors=tuple(tuple(sorted(x)) for x in nbrs),
    )


def is_connected(g: Graph) -> bool:
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in g.neighbors[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == g.n


def apply_normalized_adjacency(g: Graph, v) -> np.ndarray:
    """Neighbour average ``w_i = (1/d_i) sum_j a_ij v_j``.

    Evaluated as ``v_i + mean_j (v_j - v_i)``, which is the same map but
    returns a constant vector bit-for-bit unchanged, so consensus states stay
    exactly on the synchronization manifold in floating point.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (g.n,):
        raise LengthMismatch(f"expected vector of length {g.n}, got shape {v.shape}")
    diff = v[g._dst] - v[g._src]
    return v + np.bincount(g._src, weights=diff, minlength=g.n) / g._deg


def random_connected_graph(n: int, rng: np.random.Generator, extra_edge_prob: float = 0.2) -> Graph:
    """Random spanning tree plus independent extra edges; always connected."""
    if n < 2:
        raise IsolatedVertex(0)
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        parent = order[rng.integers(0, k)]
        child = order[k]
        edges.add((min(parent, child), max(parent, child)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    return build_graph(n, sorted(edges))


def triangle() -> Graph:
    return build_graph(3, [(0, 1), (1, 2), (0, 2)])


def load_graph(path) -> Graph:
    """Read ``{"n": int, "edges": [[i, j], ...]}``."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict) or set(data) != {"n", "edges"}:
        raise ValueError("graph JSON must have exactly the keys 'n' and 'edges'")
    return build_graph(int(data["n"]), data["edges"])
