"""Named states and gates: maximally entangled, GHZ, weighted graph and
hypergraph states, the extremal witness states and a few fixed examples.

Graph weights are exact fractions. The phase of a basis amplitude is
``exp(2 pi i * sum_e w_e * prod(digits of e) / D)``, reduced modulo 1 in
integer arithmetic before exponentiation.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .statevec import PureState, make_pure


def _as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, float):
        return Fraction(w).limit_denominator(1 << 20)
    return Fraction(w)


@dataclass(frozen=True)
class GraphSpec:
    """Weighted qudit graph with optional hyperedges.

    ``edges`` holds ``(i, j, weight)`` and ``hyperedges`` holds
    ``(vertices, weight)``; vertices are 0-based.
    """

    n: int
    dim: int
    edges: tuple = ()
    hyperedges: tuple = field(default=())

    def __post_init__(self):
        if self.n < 1 or self.dim < 2:
            raise ValueError("graph needs n >= 1 vertices of local dimension >= 2")
        edges = []
        for e in self.edges:
            i, j, *w = e
            w = _as_fraction(w[0] if w else 1)
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            self._check_vertex(i), self._check_vertex(j)
            self._check_weight(w)
            edges.append((i, j, w))
        hyper = []
        for h in self.hyperedges:
            verts, *w = h
            verts = tuple(int(v) for v in verts)
            w = _as_fraction(w[0] if w else 1)
            if len(verts) < 2 or len(set(verts)) != len(verts):
                raise ValueError(f"hyperedge {verts} needs at least two distinct vertices")
            for v in verts:
                self._check_vertex(v)
            self._check_weight(w)
            hyper.append((verts, w))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "hyperedges", tuple(hyper))

    def _check_vertex(self, v):
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range for {self.n} vertices")

    def _check_weight(self, w: Fraction):
        if (2 * self.dim) % w.denominator:
            raise ValueError(f"weight {w} has denominator not dividing 2D = {2 * self.dim}")

    def edge_set(self) -> set[frozenset]:
        """Unweighted edge set (for comparisons of qubit graphs)."""
        return {frozenset((i, j)) for i, j, _ in self.edges}

    def relabel(self, perm: Sequence[int]) -> "GraphSpec":
        """Vertex ``v`` becomes ``perm.index(v)``, matching ``permute_parties(state, perm)``."""
        inv = {old: new for new, old in enumerate(perm)}
        return GraphSpec(
            self.n,
            self.dim,
            tuple((inv[i], inv[j], w) for i, j, w in self.edges),
            tuple((tuple(inv[v] for v in vs), w) for vs, w in self.hyperedges),
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dim": self.dim,
            "edges": [[i, j, str(w)] for i, j, w in self.edges],
            "hyperedges": [[list(vs), str(w)] for vs, w in self.hyperedges],
        }

    @classmethod
    def from_json(cls, obj) -> "GraphSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            int(obj["n"]),
            int(obj["dim"]),
            tuple((i, j, Fraction(w)) for i, j, w in obj.get("edges", [])),
            tuple((tuple(vs), Fraction(w)) for vs, w in obj.get("hyperedges", [])),
        )


def maximally_entangled(D: int) -> PureState:
    if D < 2:
        raise ValueError("maximally entangled state needs D >= 2")
    amps = np.zeros(D * D)
    amps[np.arange(D) * (D + 1)] = 1 / math.sqrt(D)
    return PureState((D, D), amps)


def ghz(N: int, D: int) -> PureState:
    if N < 2 or D < 2:
        raise ValueError("GHZ state needs N >= 2 parties and D >= 2 levels")
    amps = np.zeros(D**N)
    step = sum(D**k for k in range(N))
    amps[np.arange(D) * step] = 1 / math.sqrt(D)
    return PureState((D,) * N, amps)


def _digits(n: int, dim: int) -> np.ndarray:
    """All basis digit strings, shape (dim**n, n), party 0 most significant."""
    return np.indices((dim,) * n).reshape(n, -1).T.astype(np.int64)


def graph_phases(g: GraphSpec) -> np.ndarray:
    """Phase factor of every basis amplitude of the graph state (unnormalized)."""
    weights = [w for *_, w in g.edges] + [w for _, w in g.hyperedges]
    denom = g.dim * math.lcm(*(w.denominator for w in weights)) if weights else g.dim
    digits = _digits(g.n, g.dim)
    expo = np.zeros(len(digits), dtype=np.int64)
    for i, j, w in g.edges:
        c = w * denom / g.dim
        expo = (expo + int(c) * digits[:, i] * digits[:, j]) % denom
    for vs, w in g.hyperedges:
        c = w * denom / g.dim
        prod = np.prod(digits[:, list(vs)], axis=1) % denom
        expo = (expo + int(c) * prod) % denom
    return np.exp(2j * np.pi * expo / denom)


def weighted_graph_state(g: GraphSpec) -> PureState:
    amps = graph_phases(g) / math.sqrt(g.dim**g.n)
    return PureState((g.dim,) * g.n, amps)


def controlled_phase(dim: int, weight=1) -> np.ndarray:
    """Diagonal two-qudit gate Z^w_{ij} = sum_g |g><g| (x) Z^{g w}."""
    w = _as_fraction(weight)
    g = np.arange(dim)
    phases = np.exp(2j * np.pi * float(w) * np.outer(g, g) / dim)
    return np.diag(phases.reshape(-1))


def vertical_unitary(weight=1) -> np.ndarray:
    """Two-qubit gate |+><+| (x) 1 + |-><-| (x) Z^w, control qubit first."""
    w = _as_fraction(weight)
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    zw = np.diag([1, np.exp(1j * np.pi * float(w))])
    return np.kron(np.outer(plus, plus), np.eye(2)) + np.kron(np.outer(minus, minus), zw)


def chain_graph(n: int = 4, dim: int = 4) -> GraphSpec:
    return GraphSpec(n, dim, tuple((i, i + 1, 1) for i in range(n - 1)))


def chain4x4() -> PureState:
    """Four-ququart chain graph state."""
    return weighted_graph_state(chain_graph(4, 4))


# Qubit order of the eight-qubit encoding: A1 A2 B1 B2 C1 C2 D1 D2.
CHAIN_QUBITS = ("A1", "A2", "B1", "B2", "C1", "C2", "D1", "D2")
# Ququart digits split as A=2A1+A2, B=2B2+B1, C=2C1+C2, D=2D2+D1, so
# regrouping each ququart into (msb, lsb) gives A1 A2 B2 B1 C1 C2 D2 D1.
CHAIN_REGROUP_PERM = (0, 1, 3, 2, 4, 5, 7, 6)


def chain_qubit_graph(diagonal: bool = True) -> GraphSpec:
    """Eight-qubit weighted graph encoding the four-ququart chain.

    With ``diagonal=False`` the three half-weight edges are dropped, which
    leaves two disjoint four-qubit chains.
    """
    q = {name: k for k, name in enumerate(CHAIN_QUBITS)}
    edges = [(q[a], q[b], 1) for a, b in
             [("A1", "B1"), ("A2", "B2"), ("B2", "C2"), ("B1", "C1"), ("C1", "D1"), ("C2", "D2")]]
    if diagonal:
        edges += [(q[a], q[b], Fraction(1, 2)) for a, b in [("A2", "B1"), ("B1", "C2"), ("C2", "D1")]]
    return GraphSpec(8, 2, tuple(edges))


def xi_states() -> tuple[PureState, PureState]:
    """The Schmidt-rank three and rank four extremal two-ququart states."""
    xi1 = np.zeros(16)
    xi1[[0, 5, 10]] = 1 / math.sqrt(3)
    xi2 = np.zeros(16)
    xi2[0] = math.sqrt(3 / 4)
    xi2[[5, 10, 15]] = 1 / (2 * math.sqrt(3))
    return PureState((4, 4), xi1), PureState((4, 4), xi2)


def example3_state() -> PureState:
    """Three-ququart state sum_j |u_j>|j>|u_j> - 2|333>, normalized."""
    u = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=float)
    t = np.einsum("ja,jb,jc->abc", u, np.eye(4), u)
    t[3, 3, 3] -= 2
    return make_pure((4, 4, 4), t.reshape(-1), normalize=True)


def example3_hypergraph() -> GraphSpec:
    """Six-qubit hypergraph Z_123456 Z_13 Z_35 Z_24 Z_46 (0-based vertices)."""
    return GraphSpec(6, 2, ((0, 2, 1), (2, 4, 1), (1, 3, 1), (3, 5, 1)), ((tuple(range(6)), 1),))


AME6_EDGES = ((1, 2), (3, 4), (5, 6), (2, 3), (3, 6), (4, 5), (2, 4), (3, 5), (1, 6))
AME6_LC_EDGES = ((1, 2), (5, 6), (1, 4), (2, 3), (3, 6), (4, 5), (1, 5), (2, 6))


# AME6_EDGES alone leaves eight three-qubit marginals short of maximally
# mixed; adding this edge gives an absolutely maximally entangled state.
AME6_MISSING_EDGE = (1, 3)


def ame6_graph(corrected: bool = True) -> GraphSpec:
    """Six-qubit graph; ``corrected=False`` returns the printed edge list verbatim (not AME)."""
    edges = AME6_EDGES + ((AME6_MISSING_EDGE,) if corrected else ())
    return GraphSpec(6, 2, tuple((i - 1, j - 1, 1) for i, j in edges))


def six_qubit_ame(corrected: bool = True) -> PureState:
    return weighted_graph_state(ame6_graph(corrected))


def local_complement(g: GraphSpec, v: int) -> GraphSpec:
    """Complement the subgraph induced on the neighbourhood of ``v``.

    Only defined for unweighted qubit graphs.
    """
    if g.dim != 2 or g.hyperedges or any(w != 1 for *_, w in g.edges):
        raise ValueError("local complementation needs an unweighted qubit graph")
    edges = g.edge_set()
    nbrs = sorted(u for e in edges if v in e for u in e if u != v)
    for a, b in itertools.combinations(nbrs, 2):
        edges ^= {frozenset((a, b))}
    return GraphSpec(g.n, 2, tuple((min(e), max(e), 1) for e in sorted(edges, key=sorted)))


def star_graph(N: int, D: int) -> GraphSpec:
    return GraphSpec(N, D, tuple((0, q, 1) for q in range(1, N)))


def star_graph_state(N: int, D: int) -> PureState:
    if N < 2:
        raise ValueError("star graph needs N >= 2")
    return weighted_graph_state(star_graph(N, D))


GENERATORS = ("bell", "maxent", "ghz", "graph", "example3", "xi1", "xi2", "ame6", "chain4x4", "star")
