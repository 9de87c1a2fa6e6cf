"""
Hypergraphs with hyperedges of order 1..K.

An order-k hyperedge joins k + 1 distinct nodes. Hyperedges are stored
per order as ``(N_k, k + 1)`` integer arrays whose rows are sorted member
lists, and rows are kept in lexicographic order so two hypergraphs with
the same edge sets compare equal.
"""

from __future__ import annotations

import os
from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

Hyperedge = Tuple[int, ...]


class HypergraphError(ValueError):
    """Invalid hypergraph construction or content."""


class HypergraphParseError(HypergraphError):
    """Malformed hypergraph file."""

    def __init__(self, path, lineno: int, msg: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {msg}")


def _canonical_rows(edges: Iterable[Sequence[int]], width: int) -> np.ndarray:
    rows = np.array([sorted(e) for e in edges], dtype=np.int32).reshape(-1, width)
    if len(rows) == 0:
        return rows
    order = np.lexsort(rows.T[::-1])
    return np.ascontiguousarray(rows[order])


class Hypergraph:
    """
    Immutable hypergraph on nodes ``0..n_nodes-1``.

    Parameters
    ----------
    n_nodes : int
        Number of nodes.
    edges : iterable of sequences of int
        Hyperedges; each one's order is ``len(edge) - 1``.
    max_order : int, optional
        Highest admissible order K. Defaults to the highest order present
        (or 1 for an edgeless graph).
    """

    def __init__(self, n_nodes: int, edges: Iterable[Sequence[int]] = (),
                 max_order: Optional[int] = None):
        if n_nodes < 0:
            raise HypergraphError(f"n_nodes must be non-negative, got {n_nodes}")
        grouped: Dict[int, List[Hyperedge]] = {}
        seen = set()
        for e in edges:
            key = tuple(sorted(int(v) for v in e))
            if len(key) < 2:
                raise HypergraphError(f"hyperedge {key} has fewer than 2 members")
            if len(set(key)) != len(key):
                raise HypergraphError(f"hyperedge {key} has repeated members")
            if key[0] < 0 or key[-1] >= n_nodes:
                raise HypergraphError(
                    f"hyperedge {key} references a node outside [0, {n_nodes})")
            if key in seen:
                raise HypergraphError(f"duplicate hyperedge {key}")
            seen.add(key)
            grouped.setdefault(len(key) - 1, []).append(key)

        top = max(grouped, default=1)
        if max_order is None:
            max_order = top
        if max_order < 1:
            raise HypergraphError(f"max_order must be >= 1, got {max_order}")
        if top > max_order:
            raise HypergraphError(
                f"hyperedge of order {top} exceeds max_order {max_order}")

        self.n_nodes = int(n_nodes)
        self.max_order = int(max_order)
        self._edges = {k: _canonical_rows(grouped.get(k, []), k + 1)
                       for k in range(1, self.max_order + 1)}
        for arr in self._edges.values():
            arr.setflags(write=False)
        self._packed = None

    @classmethod
    def _from_arrays(cls, n_nodes: int, arrays: Dict[int, np.ndarray],
                     max_order: int) -> "Hypergraph":
        # trusted fast path: arrays already canonical and validated
        g = cls.__new__(cls)
        g.n_nodes = int(n_nodes)
        g.max_order = int(max_order)
        g._edges = {}
        for k in range(1, max_order + 1):
            arr = arrays.get(k)
            if arr is None:
                arr = np.empty((0, k + 1), dtype=np.int32)
            arr = np.ascontiguousarray(arr, dtype=np.int32)
            arr.setflags(write=False)
            g._edges[k] = arr
        g._packed = None
        return g

    # -- queries --------------------------------------------------------

    @property
    def edges_by_order(self) -> Dict[int, np.ndarray]:
        return dict(self._edges)

    def edges(self, k: Optional[int] = None) -> Iterator[Hyperedge]:
        """Iterate hyperedges as sorted tuples, of order ``k`` or all orders."""
        orders = [k] if k is not None else sorted(self._edges)
        for order in orders:
            for row in self._edges.get(order, ()):
                yield tuple(int(v) for v in row)

    def hyperedge_counts(self, K: Optional[int] = None) -> np.ndarray:
        """Hyperedge counts ``[N_1, ..., N_K]``; zero for absent orders."""
        K = self.max_order if K is None else K
        return np.array([len(self._edges[k]) if k in self._edges else 0
                         for k in range(1, K + 1)], dtype=np.int64)

    @property
    def n_edges(self) -> int:
        return int(sum(len(a) for a in self._edges.values()))

    def degrees(self) -> np.ndarray:
        """Pairwise (order-1) degree of every node."""
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        np.add.at(deg, self._edges[1].ravel(), 1)
        return deg

    def restrict(self, K: int) -> "Hypergraph":
        """The sub-hypergraph of hyperedges with order <= K."""
        if K < 1:
            raise HypergraphError(f"order must be >= 1, got {K}")
        return Hypergraph._from_arrays(
            self.n_nodes, {k: a for k, a in self._edges.items() if k <= K}, K)

    def packed(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        All hyperedges as one padded array for the simulation kernels.

        Returns
        -------
        members : ndarray of int32, shape (|E|, max_order + 1)
            Sorted members, padded with -1.
        sizes : ndarray of int32, shape (|E|,)
            Number of members of each hyperedge.
        """
        if self._packed is None:
            width = self.max_order + 1
            blocks, sizes = [], []
            for k in sorted(self._edges):
                arr = self._edges[k]
                block = np.full((len(arr), width), -1, dtype=np.int32)
                block[:, :k + 1] = arr
                blocks.append(block)
                sizes.append(np.full(len(arr), k + 1, dtype=np.int32))
            members = np.concatenate(blocks) if blocks else np.empty((0, width), np.int32)
            sz = np.concatenate(sizes) if sizes else np.empty(0, np.int32)
            members.setflags(write=False)
            sz.setflags(write=False)
            self._packed = (members, sz)
        return self._packed

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        if self.n_nodes != other.n_nodes or self.max_order != other.max_order:
            return False
        return all(np.array_equal(self._edges[k], other._edges[k]) for k in self._edges)

    def __hash__(self):
        return hash((self.n_nodes, self.max_order,
                     tuple(a.tobytes() for _, a in sorted(self._edges.items()))))

    def __repr__(self) -> str:
        counts = ", ".join(f"N_{k}={n}" for k, n in
                           enumerate(self.hyperedge_counts(), start=1))
        return f"Hypergraph(n_nodes={self.n_nodes}, {counts})"


def hyperedge_counts(g: Hypergraph, K: Optional[int] = None) -> np.ndarray:
    return g.hyperedge_counts(K)


# -- generators ------------------------------------------------------------

def generate_complete(n: int) -> Hypergraph:
    """Complete graph on ``n`` nodes (order-1 hyperedges only)."""
    if n < 2:
        raise HypergraphError(f"complete graph needs n >= 2, got {n}")
    i, j = np.triu_indices(n, k=1)
    pairs = np.column_stack([i, j]).astype(np.int32)
    return Hypergraph._from_arrays(n, {1: pairs}, 1)


def generate_er(n: int, p: float, seed=None) -> Hypergraph:
    """
    Erdos-Renyi G(n, p) graph.

    Each unordered pair is included independently with probability ``p``,
    using one uniform draw per pair in lexicographic pair order, so the
    graph is a pure function of ``(n, p, seed)``.
    """
    if not 0.0 <= p <= 1.0:
        raise HypergraphError(f"edge probability must lie in [0, 1], got {p}")
    if n < 0:
        raise HypergraphError(f"n must be non-negative, got {n}")
    rng = np.random.default_rng(seed)
    i, j = np.triu_indices(n, k=1)
    keep = rng.random(len(i)) < p
    pairs = np.column_stack([i[keep], j[keep]]).astype(np.int32)
    return Hypergraph._from_arrays(n, {1: pairs}, 1)


def generate_triangular_lattice(rows: int, cols: int, periodic: bool = True) -> Hypergraph:
    """
    Triangular lattice on a ``rows x cols`` grid.

    Node ``(r, c)`` has id ``r * cols + c`` and links to ``(r, c+1)``,
    ``(r+1, c)`` and ``(r+1, c-1)``. With ``periodic`` both axes wrap,
    giving a 6-regular torus with ``3 * rows * cols`` edges.
    """
    if rows < 3 or cols < 3:
        raise HypergraphError(f"lattice needs rows, cols >= 3, got {rows}x{cols}")
    edges = set()
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            for dr, dc in ((0, 1), (1, 0), (1, -1)):
                rr, cc = r + dr, c + dc
                if periodic:
                    rr, cc = rr % rows, cc % cols
                elif not (0 <= rr < rows and 0 <= cc < cols):
                    continue
                v = rr * cols + cc
                edges.add((min(u, v), max(u, v)))
    return Hypergraph(rows * cols, sorted(edges), max_order=1)


def clique_complex(g: Hypergraph, K: int) -> Hypergraph:
    """
    Lift a pairwise graph to its clique complex up to order ``K``.

    Every (k+1)-clique of ``g`` becomes an order-k hyperedge for
    ``k = 1..K``. Cliques are grown one node at a time, extending a
    sorted clique only by common neighbours larger than its last member,
    so each clique is produced exactly once.
    """
    if K < 1:
        raise HypergraphError(f"clique complex order must be >= 1, got {K}")
    if any(len(a) for k, a in g.edges_by_order.items() if k > 1):
        raise HypergraphError("clique_complex expects a pairwise (order-1) graph")

    pairs = g.edges_by_order[1]
    higher: List[set] = [set() for _ in range(g.n_nodes)]
    for u, v in pairs:
        higher[u].add(int(v))

    arrays = {1: pairs}
    # frontier entries: (clique, common higher neighbours of all members)
    frontier = [((int(u), int(v)), higher[u] & higher[v]) for u, v in pairs]
    for k in range(2, K + 1):
        nxt = []
        for clique, cand in frontier:
            for w in sorted(cand):
                nxt.append((clique + (w,), cand & higher[w]))
        arrays[k] = np.array([c for c, _ in nxt], dtype=np.int32).reshape(-1, k + 1)
        frontier = nxt
    # extension preserves lexicographic order, so rows are already canonical
    return Hypergraph._from_arrays(g.n_nodes, arrays, K)


def brute_force_cliques(g: Hypergraph, K: int) -> Dict[int, set]:
    """All (k+1)-node complete subsets of ``g`` for ``k = 1..K`` by exhaustive search."""
    adj = {tuple(e) for e in g.edges(1)}
    out = {}
    for k in range(1, K + 1):
        out[k] = {s for s in combinations(range(g.n_nodes), k + 1)
                  if all(pair in adj for pair in combinations(s, 2))}
    return out


# -- serialisation ---------------------------------------------------------

_HEADER = "hypergraph"


def save(g: Hypergraph, path) -> None:
    """Write ``g`` as text: a ``hypergraph <n_nodes> <max_order>`` header, then one hyperedge per line."""
    with open(path, "w") as fh:
        fh.write(f"{_HEADER} {g.n_nodes} {g.max_order}\n")
        for k in sorted(g.edges_by_order):
            for row in g.edges_by_order[k]:
                fh.write(" ".join(map(str, row.tolist())))
                fh.write("\n")


def load(path) -> Hypergraph:
    """Read a hypergraph written by :func:`save`; blank lines and ``#`` comments are skipped."""
    path = os.fspath(path)
    header = None
    edges: List[Hyperedge] = []
    seen = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if header is None:
                if fields[0] != _HEADER or len(fields) != 3:
                    raise HypergraphParseError(
                        path, lineno, f"expected '{_HEADER} <n_nodes> <max_order>'")
                try:
                    header = (int(fields[1]), int(fields[2]))
                except ValueError:
                    raise HypergraphParseError(path, lineno, "non-integer header field") from None
                if header[0] < 0 or header[1] < 1:
                    raise HypergraphParseError(path, lineno, "invalid header values")
                continue
            try:
                members = tuple(int(x) for x in fields)
            except ValueError:
                raise HypergraphParseError(path, lineno, "non-integer node index") from None
            n_nodes, max_order = header
            if len(members) < 2:
                raise HypergraphParseError(path, lineno, "hyperedge needs at least 2 members")
            if len(members) - 1 > max_order:
                raise HypergraphError(
                    f"{path}:{lineno}: hyperedge order {len(members) - 1} exceeds max_order {max_order}")
            if list(members) != sorted(set(members)):
                raise HypergraphError(
                    f"{path}:{lineno}: members must be distinct and ascending")
            if members[0] < 0 or members[-1] >= n_nodes:
                raise HypergraphError(
                    f"{path}:{lineno}: node index out of range [0, {n_nodes})")
            if members in seen:
                raise HypergraphError(f"{path}:{lineno}: duplicate hyperedge {members}")
            seen.add(members)
            edges.append(members)
    if header is None:
        raise HypergraphParseError(path, 1, "missing header")
    return Hypergraph(header[0], edges, max_order=header[1])
