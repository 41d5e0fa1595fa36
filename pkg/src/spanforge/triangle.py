"""Triangle finding on graphs whose only cycle is a triangle.

Inputs are edge-indicator words over the unordered vertex pairs in
lexicographic order. The span program looks for a colourful triangle under a
random 3-colouring and answers with its colour-0 vertex. The negative witness
comes from the auxiliary graph ``H`` (colour-0 vertices doubled into copies 0
and 3), contracted along its unique cycle and labelled by a rooted traversal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import networkx as nx
import numpy as np

from .span import SpanProgram, check_pair, negative_size, positive_size

RNG_ALGORITHM = "numpy.random.PCG64"


class PromiseViolation(ValueError):
    """The graph has a cycle other than a single triangle."""


class _NotColorful:
    def __repr__(self):
        return "NOT_COLORFUL"


NOT_COLORFUL = _NotColorful()


@lru_cache(maxsize=None)
def vertex_pairs(n_vertices: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(n_vertices), 2))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class UnicyclicTriangleGraph:
    n_vertices: int
    edges: frozenset
    triangle: tuple[int, int, int]

    def __post_init__(self):
        edges = frozenset(tuple(sorted((int(u), int(v)))) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "triangle", tuple(sorted(int(v) for v in self.triangle)))
        if self.n_vertices < 3:
            raise ValueError("need at least 3 vertices")
        if any(u == v or not 0 <= u < self.n_vertices or not 0 <= v < self.n_vertices for u, v in edges):
            raise ValueError("edges must join distinct existing vertices")
        cycles = nx.cycle_basis(self.graph())
        if len(cycles) != 1 or sorted(cycles[0]) != list(self.triangle):
            raise PromiseViolation(f"expected the triangle {self.triangle} as the only cycle, found {cycles}")

    def graph(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n_vertices))
        G.add_edges_from(self.edges)
        return G

    def word(self) -> tuple[int, ...]:
        return tuple(int(p in self.edges) for p in vertex_pairs(self.n_vertices))


@dataclass(frozen=True)
class TriangleColoring:
    colors: tuple[int, ...]
    seed: int | None = None

    def __post_init__(self):
        colors = tuple(int(c) for c in self.colors)
        if any(c not in (0, 1, 2) for c in colors):
            raise ValueError("colours must be 0, 1 or 2")
        object.__setattr__(self, "colors", colors)

    @classmethod
    def random(cls, n_vertices: int, seed) -> "TriangleColoring":
        rng = _rng(seed)
        return cls(tuple(rng.integers(0, 3, size=n_vertices)), None if isinstance(seed, np.random.Generator) else seed)

    def color_zero(self) -> list[int]:
        return [v for v, c in enumerate(self.colors) if c == 0]


def random_unicyclic_graph(n_vertices: int, seed) -> UnicyclicTriangleGraph:
    """Three random vertices form the triangle; the rest join a random recursive tree."""
    if n_vertices < 3:
        raise ValueError("need at least 3 vertices")
    rng = _rng(seed)
    perm = [int(v) for v in rng.permutation(n_vertices)]
    a, b, c = perm[:3]
    edges = {(a, b), (b, c), (a, c)}
    for k in range(3, n_vertices):
        edges.add((perm[k], perm[int(rng.integers(0, k))]))
    return UnicyclicTriangleGraph(n_vertices, frozenset(edges), (a, b, c))


def _oriented(u: int, v: int, colors) -> tuple[tuple[int, int], tuple[int, int]] | None:
    """H-endpoints ``(a, i), (b, k)`` of the input vector ``|a,i> - |b,k>`` for the pair, if any."""
    cu, cv = colors[u], colors[v]
    if cu == cv:
        return None
    if (cv - cu) % 3 != 1:
        u, v, cu, cv = v, u, cv, cu
    return (u, cu), (v, cv if cv != 0 else 3)


def triangle_program(n_vertices: int, coloring: TriangleColoring) -> SpanProgram:
    colors = coloring.colors
    if len(colors) != n_vertices:
        raise ValueError("colouring does not cover the vertex set")
    zero = coloring.color_zero()
    if not zero:
        raise ValueError("no colour-0 vertex: the program would have no targets")
    d = 4 * n_vertices
    pairs = vertex_pairs(n_vertices)
    inputs = {}
    for j, (u, v) in enumerate(pairs):
        ends = _oriented(u, v, colors)
        if ends is None:
            continue
        (a, i), (b, k) = ends
        vec = np.zeros((d, 1))
        vec[4 * a + i] = 1.0
        vec[4 * b + k] = -1.0
        inputs[(j, 1)] = vec
    targets = np.zeros((len(zero), d))
    for t, v in enumerate(zero):
        targets[t, 4 * v] = 1.0
        targets[t, 4 * v + 3] = -1.0
    return SpanProgram.orthogonal(len(pairs), 2, targets, inputs)


def triangle_label(G: UnicyclicTriangleGraph, coloring: TriangleColoring):
    """Index of the triangle's colour-0 vertex among the colour-0 vertices, or NOT_COLORFUL."""
    colors = coloring.colors
    if sorted(colors[v] for v in G.triangle) != [0, 1, 2]:
        return NOT_COLORFUL
    x = next(v for v in G.triangle if colors[v] == 0)
    return coloring.color_zero().index(x)


def auxiliary_graph(G: UnicyclicTriangleGraph, coloring: TriangleColoring) -> nx.Graph:
    """``H``: colour-0 vertices split into copies 0 and 3, same-colour edges dropped."""
    colors = coloring.colors
    H = nx.Graph()
    for v, c in enumerate(colors):
        if c == 0:
            H.add_edge((v, 0), (v, 3))
        else:
            H.add_node((v, c))
    for u, v in sorted(G.edges):
        ends = _oriented(u, v, colors)
        if ends is not None:
            H.add_edge(*ends)
    return H


def gamma_labels(G: UnicyclicTriangleGraph, coloring: TriangleColoring, s: int = 0) -> dict:
    """The labels ``gamma(u_i)`` on the nodes of ``H`` for a colourful triangle."""
    colors = coloring.colors
    x, y, z = (next(v for v in G.triangle if colors[v] == c) for c in (0, 1, 2))
    cycle = [(x, 0), (y, 1), (z, 2), (x, 3)]
    H = auxiliary_graph(G, coloring)
    Hc = H.copy()
    A = "A"
    neighbours = {nb for node in cycle for nb in H.neighbors(node)} - set(cycle)
    Hc.remove_nodes_from(cycle)
    Hc.add_node(A)
    Hc.add_edges_from((A, nb) for nb in neighbours)
    if not nx.is_forest(Hc):
        raise PromiseViolation("contracted auxiliary graph is not a forest")

    dist = nx.single_source_shortest_path_length(G.graph(), s)
    far = G.n_vertices + 1

    def key(node):
        if node == A:
            return min(key(c) for c in cycle)
        v, i = node
        return (dist.get(v, far), v, i)

    gamma = {}
    for comp in nx.connected_components(Hc):
        root = min(comp, key=key)
        gamma[root] = 0
        for parent, child in nx.bfs_edges(Hc, root):
            step = 0
            if parent != A and child != A and parent[0] == child[0]:
                # u_0 -> u_3 decreases, u_3 -> u_0 increases
                step = -1 if parent[1] == 0 else 1
            gamma[child] = gamma[parent] + step
    for node in cycle:
        gamma[node] = gamma[A]
    del gamma[A]
    return gamma


def triangle_witnesses(P: SpanProgram, G: UnicyclicTriangleGraph, coloring: TriangleColoring, s: int = 0):
    """``(w_G, wbar_G)`` for a colourful triangle, else ``NOT_COLORFUL``."""
    if triangle_label(G, coloring) is NOT_COLORFUL:
        return NOT_COLORFUL
    index = {p: j for j, p in enumerate(vertex_pairs(G.n_vertices))}
    w = np.zeros(P.H_dim)
    for u, v in combinations(G.triangle, 2):
        # every differently coloured pair carries exactly one column, the first of its block
        w[P.offsets[index[(u, v)]]] = 1.0
    wbar = np.zeros(P.target_dim)
    for (v, i), g in gamma_labels(G, coloring, s).items():
        wbar[4 * v + i] = g
    return w, wbar


@dataclass(frozen=True)
class MonteCarloStats:
    n_vertices: int
    trials: int
    seed: int
    colorful: int
    mean_negative: float
    max_negative: float
    max_positive_deviation: float  # max |pos - 3|
    max_residual: float
    rng: str = RNG_ALGORITHM

    @property
    def hit_rate(self) -> float:
        return self.colorful / self.trials

    def as_dict(self) -> dict:
        return {"n_vertices": self.n_vertices, "trials": self.trials, "seed": self.seed,
                "rng": self.rng, "colorful": self.colorful, "hit_rate": self.hit_rate,
                "mean_negative": self.mean_negative, "max_negative": self.max_negative,
                "max_positive_deviation": self.max_positive_deviation,
                "max_residual": self.max_residual}


def sample_instance(n_vertices: int, seed: int) -> tuple[UnicyclicTriangleGraph, TriangleColoring]:
    rng = _rng(seed)
    G = random_unicyclic_graph(n_vertices, rng)
    return G, TriangleColoring(tuple(rng.integers(0, 3, size=n_vertices)), seed)


def monte_carlo_negative_size(n_vertices: int, trials: int, seed: int) -> MonteCarloStats:
    """Trial ``t`` uses the generator seeded with ``seed ^ t`` for both graph and colouring."""
    if trials < 1:
        raise ValueError("need at least one trial")
    negs, pos_dev, resid = [], 0.0, 0.0
    for t in range(trials):
        G, col = sample_instance(n_vertices, seed ^ t)
        alpha = triangle_label(G, col)
        if alpha is NOT_COLORFUL:
            continue
        P = triangle_program(n_vertices, col)
        w, wbar = triangle_witnesses(P, G, col)
        r = check_pair(P, G.word(), alpha, w, wbar)
        resid = max(resid, r.max)
        pos_dev = max(pos_dev, abs(positive_size(P, w) - 3.0))
        negs.append(negative_size(P, wbar))
    mean = float(np.mean(negs)) if negs else float("nan")
    mx = float(np.max(negs)) if negs else float("nan")
    return MonteCarloStats(n_vertices, trials, seed, len(negs), mean, mx, pos_dev, resid)


def triangle_family(n_vertices: int, seed: int, size: int = 4, max_draws: int = 10_000):
    """One colouring and ``size`` promise graphs whose triangles are colourful under it.

    The colouring is redrawn until it uses every colour and has two colour-0 vertices,
    and graphs are drawn
    until at least two different labels occur, so the resulting function is not
    constant. Returns ``(program, witnesses, function)``.
    """
    from .functions import PartialFunction
    from .span import WitnessSet
    rng = _rng(seed)
    while True:
        col = TriangleColoring(tuple(rng.integers(0, 3, size=n_vertices)), seed)
        if len(col.color_zero()) >= 2 and {1, 2} <= set(col.colors):
            break
    P = triangle_program(n_vertices, col)
    table, W = {}, WitnessSet()
    for _ in range(max_draws):
        G = random_unicyclic_graph(n_vertices, rng)
        label = triangle_label(G, col)
        x = G.word()
        if label is NOT_COLORFUL or x in table:
            continue
        if len(table) == size - 1 and set(table.values()) == {label}:
            continue
        table[x] = label
        W.add(x, *triangle_witnesses(P, G, col))
        if len(table) == size:
            return P, W, PartialFunction(len(vertex_pairs(n_vertices)), 2, P.m, table)
    raise RuntimeError(f"no suitable family within {max_draws} draws")
