"""Shattering, VC and VC2 dimension, and power-set witness graphs.

The two-level witness U(k) is the bipartite graph on k index vertices and
2^k subset vertices joined by containment.  The three-level dimension asks
for grid-indexed shattering witnesses a_i, b_j, c_S with a_i b_j c_S an edge
iff (i,j) in S; all witness vertices are required pairwise distinct (an
edge needs three distinct vertices, so colliding witnesses would make the
predicate ill-defined).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import EdgeColoredBipartiteGraph, Hypergraph3, OversizeError

VC_GROUND_LIMIT = 24
UK_ORDER_LIMIT = 16
E0E1_EXHAUSTIVE_LIMIT = 6


@dataclass
class SetSystem:
    ground: int
    sets: list

    def __post_init__(self):
        self.sets = [frozenset(int(v) for v in s) for s in self.sets]
        for s in self.sets:
            if s and (min(s) < 0 or max(s) >= self.ground):
                raise ValueError("set element out of ground range")

    def masks(self) -> list[int]:
        out = []
        for s in self.sets:
            m = 0
            for v in s:
                m |= 1 << v
            out.append(m)
        return out


def _shatters(masks: list[int], subset: int, size: int) -> bool:
    traces = set()
    want = 1 << size
    for m in masks:
        traces.add(m & subset)
        if len(traces) == want:
            return True
    return False


def vc_dim(system: SetSystem) -> int:
    """Largest d with some d-subset of the ground set shattered (exhaustive)."""
    if system.ground > VC_GROUND_LIMIT:
        raise OversizeError(f"exhaustive vc_dim limited to ground {VC_GROUND_LIMIT}")
    masks = system.masks()
    if not masks:
        return 0
    distinct = len(set(masks))
    best = 0
    elements = list(range(system.ground))
    for d in range(1, system.ground + 1):
        if (1 << d) > distinct:
            break  # traces cannot exceed the number of distinct sets
        found = False
        for combo in itertools.combinations(elements, d):
            sub = 0
            for v in combo:
                sub |= 1 << v
            if _shatters(masks, sub, d):
                found = True
                break
        if not found:
            break
        best = d
    return best


@dataclass
class UkGraph:
    k: int
    a_vertices: list
    c_vertices: list
    edges: frozenset

    def neighborhood_system(self) -> SetSystem:
        """Set system of all vertex neighborhoods over the whole vertex set."""
        n = len(self.a_vertices) + len(self.c_vertices)
        idx = {v: i for i, v in enumerate(self.a_vertices + self.c_vertices)}
        neigh = {v: set() for v in idx}
        for a, c in self.edges:
            neigh[a].add(idx[c])
            neigh[c].add(idx[a])
        return SetSystem(ground=n, sets=[neigh[v] for v in idx])


def build_uk(k: int) -> UkGraph:
    """The power-set witness graph: a_i ~ c_S iff i is in S (bitmask order)."""
    if not 1 <= k <= UK_ORDER_LIMIT:
        raise ValueError(f"k must be in [1, {UK_ORDER_LIMIT}]")
    a_vertices = [("a", i) for i in range(1, k + 1)]
    c_vertices = [("c", s) for s in range(1 << k)]
    edges = set()
    for s in range(1 << k):
        for i in range(1, k + 1):
            if s >> (i - 1) & 1:
                edges.add((("a", i), ("c", s)))
    return UkGraph(k=k, a_vertices=a_vertices, c_vertices=c_vertices,
                   edges=frozenset(edges))


# ---------------------------------------------------------------------------
# VC2 dimension


@dataclass
class Vc2Result:
    dimension: int
    complete: bool
    evaluations: int

    def __int__(self):
        return self.dimension


def _vc2_witness_exists(h: Hypergraph3, k: int, budget: list | None) -> bool | None:
    """Exhaustive search for a k-witness; None signals exhausted budget.

    Candidates for the same index tuple realize distinct pair sets, so the
    c_S are automatically distinct; a-tuples and b-tuples are enumerated as
    unordered sets because realizing every S is permutation-invariant.
    """
    n = h.n
    if n - 2 * k < (1 << (k * k)):
        return False  # not enough distinct candidates to realize every S
    verts = range(n)
    want = 1 << (k * k)
    for a_tup in itertools.combinations(verts, k):
        a_set = set(a_tup)
        for b_tup in itertools.combinations(verts, k):
            if a_set & set(b_tup):
                continue
            if budget is not None:
                budget[0] -= 1
                if budget[0] < 0:
                    return None
            used = a_set | set(b_tup)
            sigs = set()
            for c in verts:
                if c in used:
                    continue
                sig = 0
                bit = 1
                for ai in a_tup:
                    for bj in b_tup:
                        if h.has(ai, bj, c):
                            sig |= bit
                        bit <<= 1
                sigs.add(sig)
                if len(sigs) == want:
                    return True
    return False


def vc2_dim(h: Hypergraph3, k_max: int, budget: int | None = None) -> Vc2Result:
    """Largest k <= k_max admitting a grid-shattering witness.

    ``budget`` caps the number of (a,b)-tuple examinations; when exceeded the
    result carries the best bound found so far with complete=False.
    """
    best = 0
    complete = True
    counter = [budget] if budget is not None else None
    spent = 0
    for k in range(1, int(k_max) + 1):
        res = _vc2_witness_exists(h, k, counter)
        if counter is not None:
            spent = budget - max(counter[0], 0)
        if res is None:
            complete = False
            break
        if not res:
            break
        best = k
    return Vc2Result(dimension=best, complete=complete, evaluations=spent)


# ---------------------------------------------------------------------------
# 0/1-colored copies of U(k)


def find_e0e1_uk_copy(g: EdgeColoredBipartiteGraph, k: int):
    """Witness (v_1..v_k, {S: w_S}) of a color-1/color-0 copy of U(k), or None.

    For each left k-tuple the right vertices' color signatures must cover all
    2^k binary patterns; signatures containing color 2 can never match.
    """
    if k > E0E1_EXHAUSTIVE_LIMIT:
        raise OversizeError(f"exhaustive search limited to k <= {E0E1_EXHAUSTIVE_LIMIT}")
    colors = g.colors
    na, nb = colors.shape
    if na < k:
        return None
    want = 1 << k
    if nb < want:
        return None
    for combo in itertools.combinations(range(na), k):
        found = {}
        for w in range(nb):
            sig = 0
            ok = True
            for pos, a in enumerate(combo):
                c = colors[a, w]
                if c == 2:
                    ok = False
                    break
                if c == 1:
                    sig |= 1 << pos
            if ok and sig not in found:
                found[sig] = w
                if len(found) == want:
                    vs = tuple(g.left[a] for a in combo)
                    ws = {s: g.right[found[s]] for s in range(want)}
                    return (vs, ws)
    return None
