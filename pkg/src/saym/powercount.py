"""Feynman-graph topologies of the truncated theory and their superficial
degree of divergence.

Vertices are pure-gauge of valence ``3 ≤ i ≤ n`` carrying at most ``n − i``
momenta, or ghost–gauge (one gauge, one antighost and one ghost slot) carrying
at most ``n − 3``.  Both propagators fall off as ``|p|^{−(n−2)}``.  Graphs are
enumerated up to isomorphism of the typed multigraph: a connected skeleton is
grown from a spanning tree plus ``L`` extra edges, typed in every admissible
way, and deduplicated by a canonical labeling computed with colour refinement
and individualisation.
"""

from __future__ import annotations

import enum
import itertools
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import networkx as nx

MAX_LOOPS = 2
MAX_EXTERNAL = 6


class GraphError(ValueError):
    pass


class VertexKind(enum.Enum):
    GAUGE = "gauge"
    GHOST_GAUGE = "ghostGauge"


@dataclass(frozen=True, order=True)
class VertexSpec:
    kind: VertexKind
    valence: int
    max_derivatives: int

    @classmethod
    def gauge(cls, valence: int, n: int) -> "VertexSpec":
        if not 3 <= valence <= n:
            raise GraphError(f"no {valence}-valent gauge vertex at truncation order {n}")
        return cls(VertexKind.GAUGE, valence, n - valence)

    @classmethod
    def ghost(cls, n: int) -> "VertexSpec":
        return cls(VertexKind.GHOST_GAUGE, 3, n - 3)

    @property
    def color(self) -> tuple:
        return (self.kind.value, self.valence)


def vertex_set(n: int) -> list[VertexSpec]:
    return [VertexSpec.gauge(i, n) for i in range(3, n + 1)] + [VertexSpec.ghost(n)]


@dataclass(frozen=True)
class FeynmanGraph:
    """Typed multigraph; external legs fill the slots not used by edges.

    ``ghost_edges`` are ordered ``(u, v)``: antighost slot at ``u``, ghost slot at ``v``.
    """

    vertices: tuple[VertexSpec, ...]
    gauge_edges: tuple[tuple[int, int], ...] = ()
    ghost_edges: tuple[tuple[int, int], ...] = ()
    ext_gauge: tuple[int, ...] = field(init=False)
    ext_ghost: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        V = len(self.vertices)
        gauge_deg = [0] * V
        out_deg = [0] * V
        in_deg = [0] * V
        for u, v in self.gauge_edges:
            gauge_deg[u] += 1
            gauge_deg[v] += 1
        for u, v in self.ghost_edges:
            out_deg[u] += 1
            in_deg[v] += 1
        eg, et = [], []
        for j, spec in enumerate(self.vertices):
            if spec.kind is VertexKind.GAUGE:
                if out_deg[j] or in_deg[j]:
                    raise GraphError(f"ghost line ends on gauge vertex {j}")
                free = spec.valence - gauge_deg[j]
                if free < 0:
                    raise GraphError(f"vertex {j} has more edges than slots")
                eg.append(free)
                et.append(0)
            else:
                if gauge_deg[j] > 1 or out_deg[j] > 1 or in_deg[j] > 1:
                    raise GraphError(f"ghost vertex {j} slot used twice")
                eg.append(1 - gauge_deg[j])
                et.append(2 - out_deg[j] - in_deg[j])
        object.__setattr__(self, "gauge_edges", tuple(tuple(sorted(e)) for e in self.gauge_edges))
        object.__setattr__(self, "ext_gauge", tuple(eg))
        object.__setattr__(self, "ext_ghost", tuple(et))

    # -- counts ----------------------------------------------------------------
    @property
    def V(self) -> int:
        return len(self.vertices)

    @property
    def I(self) -> int:
        return len(self.gauge_edges)

    @property
    def I_ghost(self) -> int:
        return len(self.ghost_edges)

    @property
    def E(self) -> int:
        return sum(self.ext_gauge)

    @property
    def E_ghost(self) -> int:
        return sum(self.ext_ghost)

    def vertex_counts(self) -> Counter:
        return Counter(v.color for v in self.vertices)

    @property
    def v_ghost(self) -> int:
        return sum(1 for v in self.vertices if v.kind is VertexKind.GHOST_GAUGE)

    def half_edge_balance(self) -> bool:
        gauge_slots = sum(v.valence for v in self.vertices if v.kind is VertexKind.GAUGE)
        gauge_ok = 2 * self.I + self.E == gauge_slots + self.v_ghost
        ghost_ok = 2 * self.I_ghost + self.E_ghost == 2 * self.v_ghost
        return gauge_ok and ghost_ok

    # -- connectivity ----------------------------------------------------------
    def _edges(self) -> list[tuple[int, int]]:
        return list(self.gauge_edges) + list(self.ghost_edges)

    def is_connected(self) -> bool:
        return _connected(self.V, self._edges())

    def is_one_pi(self) -> bool:
        edges = self._edges()
        if not _connected(self.V, edges):
            return False
        for j, (u, v) in enumerate(edges):
            if u != v and not _connected(self.V, edges[:j] + edges[j + 1:]):
                return False
        return True

    def to_networkx(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        for j, v in enumerate(self.vertices):
            g.add_node(j, color=v.color)
        for u, v in self.gauge_edges:
            g.add_edge(u, v, kind="gauge")
            g.add_edge(v, u, kind="gauge")
        for u, v in self.ghost_edges:
            g.add_edge(u, v, kind="ghost")
        return g

    def as_dict(self) -> dict:
        return {
            "vertices": [list(v.color) for v in self.vertices],
            "gauge_edges": [list(e) for e in self.gauge_edges],
            "ghost_edges": [list(e) for e in self.ghost_edges],
            "E": self.E,
            "E_ghost": self.E_ghost,
        }


def _connected(V: int, edges) -> bool:
    if V == 0:
        return False
    adj: dict[int, set[int]] = {j: set() for j in range(V)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == V


# --------------------------------------------------------------------------
# degree of divergence
# --------------------------------------------------------------------------


def loop_number(g: FeynmanGraph) -> int:
    """First Betti number ``I + Ĩ − V + 1``."""
    if not g.is_connected():
        raise GraphError("loop number needs a connected graph")
    return g.I + g.I_ghost - g.V + 1


def omega_direct(g: FeynmanGraph, n: int) -> int:
    """``4L − (I + Ĩ)(n−2) + Σ_i v_i (n−i) + ṽ (n−3)``."""
    for v in g.vertices:
        if v.valence > n:
            raise GraphError(f"{v.valence}-valent vertex is absent at truncation order {n}")
    weights = sum(n - v.valence for v in g.vertices)
    return 4 * loop_number(g) - (g.I + g.I_ghost) * (n - 2) + weights


def omega_closed(L: int, E: int, E_ghost: int, n: int) -> int:
    """``(4−n)(L−1) + 4 − E − Ẽ``."""
    if L < 1:
        raise GraphError("closed form is stated for L ≥ 1")
    return (4 - n) * (L - 1) + 4 - E - E_ghost


# --------------------------------------------------------------------------
# canonical labeling
# --------------------------------------------------------------------------


def _refine(colors: list[int], nbrs) -> list[int]:
    while True:
        sigs = [(colors[v], tuple(sorted((colors[w],) + lab for w, lab in nbrs[v])))
                for v in range(len(colors))]
        ranks = {s: r for r, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def canonical_form(vertex_colors, gauge_edges, ghost_edges) -> tuple:
    """Canonical invariant of a vertex-coloured multigraph with undirected gauge
    and directed ghost edges; equal iff the typed graphs are isomorphic."""
    V = len(vertex_colors)
    gmat = [[0] * V for _ in range(V)]
    hmat = [[0] * V for _ in range(V)]
    for u, v in gauge_edges:
        gmat[u][v] += 1
        if u != v:
            gmat[v][u] += 1
    for u, v in ghost_edges:
        hmat[u][v] += 1
    nbrs = [
        [(w, (gmat[v][w], hmat[v][w], hmat[w][v])) for w in range(V)
         if gmat[v][w] or hmat[v][w] or hmat[w][v]]
        for v in range(V)
    ]
    base = sorted(set(vertex_colors))
    start = [base.index(c) for c in vertex_colors]
    best = None

    def encode(colors):
        order = sorted(range(V), key=colors.__getitem__)
        return (
            tuple(vertex_colors[v] for v in order),
            tuple(tuple(gmat[a][b] for b in order) for a in order),
            tuple(tuple(hmat[a][b] for b in order) for a in order),
        )

    def search(colors):
        nonlocal best
        colors = _refine(colors, nbrs)
        cells = Counter(colors)
        target = min((c for c, k in cells.items() if k > 1), default=None)
        if target is None:
            key = encode(colors)
            if best is None or key < best:
                best = key
            return
        for v in range(V):
            if colors[v] == target:
                # split v off ahead of its cell; doubling keeps other cells ordered
                search([2 * c + (0 if (w == v or c != target) else 1) for w, c in enumerate(colors)])

    search(start)
    return best


def graph_key(g: FeynmanGraph) -> tuple:
    return canonical_form([v.color for v in g.vertices], g.gauge_edges, g.ghost_edges)


# --------------------------------------------------------------------------
# enumeration
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _skeletons(V: int, L: int, one_pi: bool, max_external: int) -> tuple:
    """Connected multigraphs (loops allowed) on V vertices with V+L−1 edges,
    bridgeless if ``one_pi``, needing at most ``max_external`` legs to reach
    valence three everywhere."""
    if V == 1:
        trees = [()]
    elif V == 2:
        trees = [((0, 1),)]
    else:
        trees = [tuple(sorted(tuple(sorted(e)) for e in t.edges())) for t in nx.nonisomorphic_trees(V)]
    pairs = [(u, v) for u in range(V) for v in range(u, V)]
    seen = {}
    for tree in trees:
        for extra in itertools.combinations_with_replacement(pairs, L):
            edges = tuple(sorted(tree + extra))
            deg = Counter(x for e in edges for x in e)
            if sum(max(0, 3 - deg[j]) for j in range(V)) > max_external:
                continue
            if one_pi and _bridges(V, edges):
                continue
            key = canonical_form([0] * V, edges, ())
            seen.setdefault(key, edges)
    return tuple(seen[k] for k in sorted(seen))


def _bridges(V: int, edges) -> bool:
    for j, (u, v) in enumerate(edges):
        if u != v and not _connected(V, edges[:j] + edges[j + 1:]):
            return True
    return False


def _typings(V: int, edges, n: int, max_external: int, min_external: int, sector: str):
    """All typed graphs over one skeleton (with repeats up to isomorphism)."""
    deg = [0] * V
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    masks = range(1) if sector == "gauge" else range(1 << V)
    for mask in masks:
        ghost = [bool(mask >> j & 1) for j in range(V)]
        if sector == "ghost" and not any(ghost):
            continue
        if any(ghost[j] and deg[j] > 3 for j in range(V)):
            continue
        if any(not ghost[j] and deg[j] > n for j in range(V)):
            continue
        # forced externals: ghost vertices leave 3 − deg slots, gauge vertices need valence ≥ 3
        forced = sum(3 - deg[j] if ghost[j] else max(0, 3 - deg[j]) for j in range(V))
        if forced > max_external:
            continue
        options = []
        for u, v in edges:
            if ghost[u] and ghost[v]:
                opts = [("g", u, v), ("h", u, v)] + ([("h", v, u)] if u != v else [])
            else:
                opts = [("g", u, v)]
            options.append(opts)
        for choice in itertools.product(*options):
            gauge_e = [(u, v) for t, u, v in choice if t == "g"]
            ghost_e = [(u, v) for t, u, v in choice if t == "h"]
            gdeg = [0] * V
            outd = [0] * V
            ind = [0] * V
            for u, v in gauge_e:
                gdeg[u] += 1
                gdeg[v] += 1
            for u, v in ghost_e:
                outd[u] += 1
                ind[v] += 1
            if any(ghost[j] and (gdeg[j] > 1 or outd[j] > 1 or ind[j] > 1) for j in range(V)):
                continue
            gauge_vs = [j for j in range(V) if not ghost[j]]
            budget = max_external - forced
            base_val = {j: max(3, deg[j]) for j in gauge_vs}
            for extra in _distributions(len(gauge_vs), budget, [n - base_val[j] for j in gauge_vs]):
                total_ext = forced + sum(extra)
                if total_ext < min_external:
                    continue
                verts = []
                for j in range(V):
                    if ghost[j]:
                        verts.append(VertexSpec.ghost(n))
                    else:
                        verts.append(VertexSpec.gauge(base_val[j] + extra[gauge_vs.index(j)], n))
                yield FeynmanGraph(tuple(verts), tuple(gauge_e), tuple(ghost_e))


def _distributions(k: int, budget: int, caps: list[int]):
    """Tuples of k non-negative ints with sum ≤ budget and entry j ≤ caps[j]."""
    if k == 0:
        yield ()
        return
    for first in range(min(budget, caps[0]) + 1):
        for rest in _distributions(k - 1, budget - first, caps[1:]):
            yield (first,) + rest


def _work(args):
    V, edges, n, max_external, min_external, sector = args
    out = {}
    for g in _typings(V, edges, n, max_external, min_external, sector):
        out.setdefault(graph_key(g), g)
    return out


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SAYM_THREADS", "1")))
    except ValueError:
        return 1


def enumerate_graphs(n: int, L: int, max_external: int, one_pi: bool = True,
                     sector: str = "all", min_external: int = 1) -> list[FeynmanGraph]:
    """All typed topologies with ``L`` loops and ``min_external ≤ E+Ẽ ≤ max_external``.

    ``sector`` is ``"all"``, ``"gauge"`` (no ghost vertices) or ``"ghost"``
    (at least one ghost vertex).  Vacuum graphs are skipped unless
    ``min_external = 0``.  Output is sorted by canonical key.
    """
    if L < 1 or L > MAX_LOOPS:
        raise GraphError(f"loop order must be 1..{MAX_LOOPS}, got {L}")
    if max_external > MAX_EXTERNAL or max_external < 0:
        raise GraphError(f"max_external must be 0..{MAX_EXTERNAL}")
    if n % 2 or n < 4:
        raise GraphError("truncation order must be even and at least 4")
    if sector not in ("all", "gauge", "ghost"):
        raise GraphError(f"unknown sector {sector!r}")
    # 2(V+L−1) + E ≥ 3V bounds the vertex count
    vmax = 2 * L - 2 + max_external
    jobs = []
    for V in range(1, vmax + 1):
        for edges in _skeletons(V, L, one_pi, max_external):
            jobs.append((V, edges, n, max_external, min_external, sector))
    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_work, jobs, chunksize=8))
    else:
        parts = [_work(j) for j in jobs]
    found: dict = {}
    for part in parts:
        for k, g in part.items():
            found.setdefault(k, g)
    return [found[k] for k in sorted(found)]


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------


EULER_NOTE = ("loop number is the first Betti number I + Ĩ − V + 1; "
              "the variant with −1 would not reproduce the closed form")


@dataclass
class GraphEntry:
    graph_id: str
    L: int
    I: int
    I_ghost: int
    E: int
    E_ghost: int
    omega_direct: int
    omega_closed: int
    graph: FeynmanGraph

    def as_dict(self, with_graph: bool = False) -> dict:
        d = {
            "id": self.graph_id,
            "L": self.L,
            "I": self.I,
            "I_ghost": self.I_ghost,
            "E": self.E,
            "E_ghost": self.E_ghost,
            "omega_direct": self.omega_direct,
            "omega_closed": self.omega_closed,
        }
        if with_graph:
            d["graph"] = self.graph.as_dict()
        return d


@dataclass
class DivergenceReport:
    n: int
    Lmax: int
    max_external: int
    one_pi: bool
    per_graph: list[GraphEntry]
    divergent_classes: list[tuple[int, int, int, int]]
    verdict: bool
    mismatches: int
    notes: list[str]

    def as_dict(self, with_graphs: bool = False) -> dict:
        return {
            "n": self.n,
            "Lmax": self.Lmax,
            "max_external": self.max_external,
            "one_pi": self.one_pi,
            "graph_count": len(self.per_graph),
            "mismatches": self.mismatches,
            "divergent_classes": [
                {"L": L, "E": E, "E_ghost": Et, "omega": w} for L, E, Et, w in self.divergent_classes
            ],
            "verdict": self.verdict,
            "notes": self.notes,
            "per_graph": [e.as_dict(with_graphs) for e in self.per_graph],
        }


def classify(n: int, Lmax: int = 2, max_external: int = MAX_EXTERNAL, one_pi: bool = True) -> DivergenceReport:
    """Enumerate, compute ω both ways and decide superrenormalizability.

    The verdict holds iff every graph with ``L ≥ 2`` has ``ω < 0`` and every
    divergent one-loop graph has ``E + Ẽ ≤ 4``.
    """
    if Lmax < 1 or Lmax > MAX_LOOPS:
        raise GraphError(f"Lmax must be 1..{MAX_LOOPS}")
    notes = [EULER_NOTE, "vacuum graphs (E + Ẽ = 0) are not enumerated"]
    if n < 8:
        notes.append(f"n = {n} is below the truncation order 8 assumed by the power-counting argument")
    entries = []
    for L in range(1, Lmax + 1):
        for j, g in enumerate(enumerate_graphs(n, L, max_external, one_pi)):
            assert g.half_edge_balance(), "half-edge balance violated"
            Lg = loop_number(g)
            entries.append(GraphEntry(f"L{L}-{j:05d}", Lg, g.I, g.I_ghost, g.E, g.E_ghost,
                                      omega_direct(g, n), omega_closed(Lg, g.E, g.E_ghost, n), g))
    mismatches = sum(e.omega_direct != e.omega_closed for e in entries)
    classes = sorted({(e.L, e.E, e.E_ghost, e.omega_direct) for e in entries if e.omega_direct >= 0})
    verdict = (
        mismatches == 0
        and all(e.omega_direct < 0 for e in entries if e.L >= 2)
        and all(e.E + e.E_ghost <= 4 for e in entries if e.L == 1 and e.omega_direct >= 0)
    )
    return DivergenceReport(n, Lmax, max_external, one_pi, entries, classes, verdict, mismatches, notes)
