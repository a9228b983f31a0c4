"""Trivalent metric ribbon graphs: validation, faces, directed-edge coding, scaling.

Half-edges are written as signed edge ids. ``+e`` is edge ``e`` traversed
from its ``u`` endpoint to its ``v`` endpoint, ``-e`` the reverse. The cyclic
order at a vertex lists the half-edges *leaving* that vertex.

Directed-edge symbols follow the convention: the edge at position ``i`` of the
edge list gives symbol ``i`` (forward) and symbol ``k + i`` (reverse).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    BadCyclicOrder,
    Disconnected,
    GraphError,
    NonPositiveLength,
    NonPositiveScale,
    NotTrivalent,
)

Length = Union[Fraction, float]


def parse_length(value) -> Length:
    """Parse an edge length; strings and integers are kept exact."""
    if isinstance(value, bool):
        raise GraphError(f"invalid length {value!r}")
    if isinstance(value, (Fraction, int)) or isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise GraphError(f"cannot parse length {value!r}") from exc
    if isinstance(value, float):
        return float(value)
    raise GraphError(f"invalid length {value!r}")


def format_length(x: Length) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    length: Length

    @property
    def is_loop(self) -> bool:
        return self.u == self.v


@dataclass(frozen=True)
class MetricRibbonGraph:
    """A validated metric ribbon graph (immutable)."""

    edges: tuple[Edge, ...]
    cyclic_order: Mapping[int, tuple[int, ...]]
    trivalent: bool = True

    @property
    def k(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self.cyclic_order))

    @property
    def lengths(self) -> tuple[Length, ...]:
        return tuple(e.length for e in self.edges)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.lengths)

    def edge_by_id(self, eid: int) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def to_dict(self) -> dict:
        return {
            "edges": [
                {"id": e.id, "u": e.u, "v": e.v, "length": format_length(e.length)}
                for e in self.edges
            ],
            "cyclic_order": {str(v): list(order) for v, order in sorted(self.cyclic_order.items())},
        }


def validate_graph(raw: Union[Mapping, str], *, trivalent: bool = True) -> MetricRibbonGraph:
    """Validate a raw graph description (a mapping or its JSON text).

    Raises
    ------
    NonPositiveLength, BadCyclicOrder, NotTrivalent, Disconnected, GraphError
    """
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise GraphError(f"invalid graph JSON: {exc}") from exc
    if not isinstance(raw, Mapping) or "edges" not in raw:
        raise GraphError("graph description needs an 'edges' list")

    edges = []
    seen = set()
    for item in raw["edges"]:
        try:
            eid, u, v = int(item["id"]), int(item["u"]), int(item["v"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed edge record {item!r}") from exc
        if eid <= 0 or eid in seen:
            raise GraphError(f"edge ids must be distinct positive integers, got {eid}")
        seen.add(eid)
        length = parse_length(item["length"])
        if not length > 0:
            raise NonPositiveLength(f"edge {eid} has length {length}")
        edges.append(Edge(eid, u, v, length))
    if not edges:
        raise GraphError("graph has no edges")

    # half-edges leaving each vertex
    incident: dict[int, list[int]] = {}
    for e in edges:
        incident.setdefault(e.u, []).append(e.id)
        incident.setdefault(e.v, []).append(-e.id)

    raw_order = raw.get("cyclic_order")
    if raw_order is None:
        order = {x: tuple(sorted(hs, key=lambda h: (abs(h), h < 0))) for x, hs in incident.items()}
    else:
        order = {}
        for key, hs in raw_order.items():
            try:
                order[int(key)] = tuple(int(h) for h in hs)
            except (TypeError, ValueError) as exc:
                raise BadCyclicOrder(f"bad cyclic order at vertex {key!r}") from exc
        if set(order) != set(incident):
            raise BadCyclicOrder(
                f"cyclic orders given for vertices {sorted(order)}, graph has {sorted(incident)}"
            )
        for x, hs in order.items():
            if sorted(hs) != sorted(incident[x]):
                raise BadCyclicOrder(
                    f"cyclic order at vertex {x} is {list(hs)}, expected a permutation of {sorted(incident[x])}"
                )

    if trivalent:
        for x, hs in sorted(order.items()):
            if len(hs) != 3:
                raise NotTrivalent(f"vertex {x} has degree {len(hs)}")

    # connectivity
    adj: dict[int, set[int]] = {x: set() for x in incident}
    for e in edges:
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    start = next(iter(adj))
    reached = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in reached:
                reached.add(y)
                queue.append(y)
    if len(reached) != len(adj):
        raise Disconnected(f"vertices {sorted(set(adj) - reached)} are unreachable")

    return MetricRibbonGraph(tuple(edges), order, trivalent)


def load_graph(path: Union[str, Path], *, trivalent: bool = True) -> MetricRibbonGraph:
    return validate_graph(Path(path).read_text(encoding="utf-8"), trivalent=trivalent)


def theta_graph(l1, l2, l3) -> MetricRibbonGraph:
    """Planar theta graph on vertices 0, 1 with edges 1, 2, 3 of the given lengths."""
    return validate_graph(
        {
            "edges": [
                {"id": 1, "u": 0, "v": 1, "length": l1},
                {"id": 2, "u": 0, "v": 1, "length": l2},
                {"id": 3, "u": 0, "v": 1, "length": l3},
            ],
            "cyclic_order": {"0": [1, 2, 3], "1": [-1, -3, -2]},
        }
    )


@dataclass(frozen=True)
class DirectedEdgeCoding:
    """Alphabet of directed edges with the feeds-into transition matrix."""

    k: int
    lengths: tuple[Length, ...]
    initial: tuple[int, ...]
    terminal: tuple[int, ...]
    A: np.ndarray = field(repr=False)
    half_edges: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return 2 * self.k

    def reverse(self, i: int) -> int:
        return (i + self.k) % (2 * self.k)

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.A[i]))

    def predecessors(self, j: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.A[:, j]))

    def symbol_of(self, half_edge: int) -> int:
        return self.half_edges.index(half_edge)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.lengths)

    def word_length(self, word: Sequence[int]) -> Length:
        """Graph length of a closed word ``w_0 ... w_n`` (letters ``w_0..w_{n-1}``)."""
        return sum((self.lengths[i] for i in word[:-1]), Fraction(0) if self.exact else 0.0)


def directed_coding(g: MetricRibbonGraph) -> DirectedEdgeCoding:
    k = g.k
    lengths = [e.length for e in g.edges] * 2
    initial = [e.u for e in g.edges] + [e.v for e in g.edges]
    terminal = [e.v for e in g.edges] + [e.u for e in g.edges]
    half_edges = [e.id for e in g.edges] + [-e.id for e in g.edges]
    n = 2 * k
    A = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        rev = (i + k) % n
        for j in range(n):
            if j != rev and terminal[i] == initial[j]:
                A[i, j] = 1
    A.setflags(write=False)
    return DirectedEdgeCoding(k, tuple(lengths), tuple(initial), tuple(terminal), A, tuple(half_edges))


@dataclass(frozen=True)
class Face:
    half_edges: tuple[int, ...]
    symbols: tuple[int, ...]
    length: Length


@dataclass(frozen=True)
class FaceReport:
    faces: tuple[Face, ...]
    genus: int
    n_faces: int

    @property
    def boundary_lengths(self) -> tuple[Length, ...]:
        return tuple(f.length for f in self.faces)


def trace_faces(g: MetricRibbonGraph) -> FaceReport:
    """Trace boundary cycles.

    The face successor of a half-edge ``h`` ending at vertex ``x`` is the
    half-edge following ``-h`` in the cyclic order at ``x``.
    """
    coding = directed_coding(g)
    ends = {e.id: e.v for e in g.edges}
    ends.update({-e.id: e.u for e in g.edges})
    position = {}
    for x, hs in g.cyclic_order.items():
        for idx, h in enumerate(hs):
            position[h] = (x, idx)

    def successor(h: int) -> int:
        x, idx = position[-h]
        assert x == ends[h]
        hs = g.cyclic_order[x]
        return hs[(idx + 1) % len(hs)]

    visited: set[int] = set()
    faces = []
    for h0 in coding.half_edges:
        if h0 in visited:
            continue
        cycle = []
        h = h0
        while h not in visited:
            visited.add(h)
            cycle.append(h)
            h = successor(h)
        if h != h0:
            raise GraphError("face tracing did not close up")
        symbols = tuple(coding.symbol_of(x) for x in cycle)
        total = sum((coding.lengths[s] for s in symbols), Fraction(0) if coding.exact else 0.0)
        faces.append(Face(tuple(cycle), symbols, total))

    V, E, F = len(g.cyclic_order), g.k, len(faces)
    chi = V - E + F
    if chi % 2 or chi > 2:
        raise GraphError(f"Euler characteristic {chi} is inconsistent")
    return FaceReport(tuple(faces), (2 - chi) // 2, F)


def scale_graph(g: MetricRibbonGraph, alpha) -> MetricRibbonGraph:
    if isinstance(alpha, str):
        alpha = Fraction(alpha)
    if not alpha > 0:
        raise NonPositiveScale(f"scale factor must be positive, got {alpha}")
    if isinstance(alpha, (int, Fraction)):
        alpha = Fraction(alpha)
    edges = []
    for e in g.edges:
        if isinstance(alpha, Fraction) and isinstance(e.length, Fraction):
            length = e.length * alpha
        else:
            length = float(e.length) * float(alpha)
        edges.append(Edge(e.id, e.u, e.v, length))
    return MetricRibbonGraph(tuple(edges), dict(g.cyclic_order), g.trivalent)


def random_trivalent_graph(n_vertices: int, rng: np.random.Generator, *, max_den: int = 4,
                           max_num: int = 8, max_tries: int = 1000) -> MetricRibbonGraph:
    """Random connected trivalent multigraph (loops allowed) with rational lengths."""
    if n_vertices % 2 or n_vertices < 2:
        raise GraphError("a trivalent graph needs an even, positive number of vertices")
    for _ in range(max_tries):
        stubs = np.repeat(np.arange(n_vertices), 3)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        edges = []
        for idx, (u, v) in enumerate(pairs, start=1):
            num = int(rng.integers(1, max_num + 1))
            den = int(rng.integers(1, max_den + 1))
            edges.append({"id": idx, "u": int(u), "v": int(v), "length": f"{num}/{den}"})
        try:
            return validate_graph({"edges": edges})
        except Disconnected:
            continue
    raise GraphError("could not sample a connected trivalent graph")


def graph_from_edges(edges: Iterable[tuple[int, int, object]],
                     cyclic_order: Mapping[int, Sequence[int]] | None = None) -> MetricRibbonGraph:
    """Convenience constructor from ``(u, v, length)`` triples; edge ids start at 1."""
    raw = {"edges": [{"id": i, "u": u, "v": v, "length": l} for i, (u, v, l) in enumerate(edges, start=1)]}
    if cyclic_order is not None:
        raw["cyclic_order"] = {str(x): list(hs) for x, hs in cyclic_order.items()}
    return validate_graph(raw)
