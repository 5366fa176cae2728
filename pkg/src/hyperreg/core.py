"""Domain types shared by every other module.

Vertices are dense integer indices ``0..n-1``.  A decomposition consists of
a vertex partition into ``t`` classes plus, for every unordered pair of
classes ``(i, j)`` with ``i < j``, a partition of the bipartite pair set
``K2[V_i, V_j]``.  Pair edges are stored oriented as ``(u, w)`` with ``u``
in the lower-indexed class.

All types are immutable after construction and safe to share across
threads; derived arrays (adjacency matrices, part-index matrices) are
cached lazily.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class ParseError(ValueError):
    """Malformed input document."""


class EmptySideError(ValueError):
    """A bipartite statistic was requested on an empty side."""


class OversizeError(ValueError):
    """Input exceeds the exhaustive-mode feasibility bound."""


# ---------------------------------------------------------------------------
# 3-uniform hypergraphs


class Hypergraph3:
    """A 3-uniform hypergraph on vertex set {0..n-1}.

    Edges are unordered triples of distinct vertices with O(1) membership.
    """

    __slots__ = ("n", "_keys", "_array", "_keys_arr")

    def __init__(self, n: int, triples=()):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        self.n = int(n)
        keys = set()
        for t in triples:
            a, b, c = sorted(int(v) for v in t)
            if a == b or b == c:
                raise ValueError(f"non-distinct triple {tuple(t)}")
            if a < 0 or c >= n:
                raise ValueError(f"vertex out of range in triple {tuple(t)}")
            keys.add((a * n + b) * n + c)
        self._keys = frozenset(keys)
        self._array = None
        self._keys_arr = None

    @property
    def edge_count(self) -> int:
        return len(self._keys)

    def has(self, a: int, b: int, c: int) -> bool:
        a, b, c = sorted((a, b, c))
        if a == b or b == c:
            return False
        return (a * self.n + b) * self.n + c in self._keys

    def edges(self):
        """Sorted list of edge triples."""
        n = self.n
        out = []
        for k in self._keys:
            c = k % n
            k //= n
            out.append((k // n, k % n, c))
        out.sort()
        return out

    def to_array(self) -> np.ndarray:
        """Edges as an (m, 3) int64 array with sorted rows; cached."""
        if self._array is None:
            arr = np.array(self.edges(), dtype=np.int64).reshape(-1, 3)
            self._array = arr
        return self._array

    def keys_array(self) -> np.ndarray:
        """Sorted int64 array of encoded edge keys, for vectorized lookup."""
        if self._keys_arr is None:
            self._keys_arr = np.sort(np.fromiter(self._keys, dtype=np.int64,
                                                 count=len(self._keys)))
        return self._keys_arr

    def contains_keys(self, keys: np.ndarray) -> np.ndarray:
        """Vectorized membership of encoded keys (sorted-triple encoding)."""
        ks = self.keys_array()
        if ks.size == 0:
            return np.zeros(keys.shape, dtype=bool)
        idx = np.searchsorted(ks, keys)
        idx_c = np.minimum(idx, ks.size - 1)
        return (idx < ks.size) & (ks[idx_c] == keys)

    def __eq__(self, other):
        return (
            isinstance(other, Hypergraph3)
            and self.n == other.n
            and self._keys == other._keys
        )

    def __hash__(self):
        return hash((self.n, self._keys))

    def __repr__(self):
        return f"Hypergraph3(n={self.n}, edges={self.edge_count})"


def parse_hypergraph(text: str) -> Hypergraph3:
    """Parse the line-oriented hypergraph format.

    Header ``n=<int>``, then one triple of space-separated vertex indices
    per line.  Blank lines and ``#`` comments are ignored.  Duplicate
    triples are deduplicated.
    """
    n = None
    triples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            if not line.startswith("n="):
                raise ParseError(f"line {lineno}: expected header 'n=<int>'")
            try:
                n = int(line[2:])
            except ValueError:
                raise ParseError(f"line {lineno}: bad vertex count {line[2:]!r}") from None
            if n < 0:
                raise ParseError(f"line {lineno}: negative vertex count")
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"line {lineno}: expected three vertex indices")
        try:
            a, b, c = (int(f) for f in fields)
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex") from None
        if len({a, b, c}) != 3:
            raise ParseError(f"line {lineno}: non-distinct triple {a} {b} {c}")
        if min(a, b, c) < 0 or max(a, b, c) >= n:
            raise ParseError(f"line {lineno}: vertex out of range [0, {n})")
        triples.append((a, b, c))
    if n is None:
        raise ParseError("missing 'n=<int>' header")
    return Hypergraph3(n, triples)


def serialize_hypergraph(h: Hypergraph3) -> str:
    lines = [f"n={h.n}"]
    lines.extend(f"{a} {b} {c}" for a, b, c in h.edges())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# bipartite graphs and colored variants


class BipartiteGraph:
    """Bipartite graph with ordered sides and oriented cross edges."""

    __slots__ = ("left", "right", "edges", "_matrix", "_lidx", "_ridx")

    def __init__(self, left, right, edges=()):
        self.left = tuple(int(v) for v in left)
        self.right = tuple(int(v) for v in right)
        if set(self.left) & set(self.right):
            raise ValueError("sides must be disjoint")
        if len(set(self.left)) != len(self.left) or len(set(self.right)) != len(self.right):
            raise ValueError("duplicate vertex within a side")
        self._lidx = {v: i for i, v in enumerate(self.left)}
        self._ridx = {v: i for i, v in enumerate(self.right)}
        es = set()
        for u, w in edges:
            if u not in self._lidx or w not in self._ridx:
                raise ValueError(f"edge ({u},{w}) does not cross left->right")
            es.add((int(u), int(w)))
        self.edges = frozenset(es)
        self._matrix = None

    @property
    def density(self) -> Fraction:
        d = len(self.left) * len(self.right)
        if d == 0:
            return Fraction(0)
        return Fraction(len(self.edges), d)

    def matrix(self) -> np.ndarray:
        """Boolean adjacency (|left|, |right|); cached."""
        if self._matrix is None:
            m = np.zeros((len(self.left), len(self.right)), dtype=bool)
            for u, w in self.edges:
                m[self._lidx[u], self._ridx[w]] = True
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def same_sides(self, other: "BipartiteGraph") -> bool:
        return self.left == other.left and self.right == other.right

    def __repr__(self):
        return f"BipartiteGraph({len(self.left)}+{len(self.right)}, edges={len(self.edges)})"


class EdgeColoredBipartiteGraph:
    """Bipartite graph with every cross pair colored 0, 1 or 2."""

    __slots__ = ("left", "right", "colors")

    def __init__(self, left, right, colors):
        self.left = tuple(left)
        self.right = tuple(right)
        colors = np.asarray(colors, dtype=np.int8)
        if colors.shape != (len(self.left), len(self.right)):
            raise ValueError("color matrix shape mismatch")
        if colors.size and (colors.min() < 0 or colors.max() > 2):
            raise ValueError("colors must be in {0,1,2}")
        colors = colors.copy()
        colors.setflags(write=False)
        self.colors = colors

    def color_class_matrix(self, u: int) -> np.ndarray:
        return self.colors == u

    def color_count(self, u: int) -> int:
        return int((self.colors == u).sum())

    def __repr__(self):
        return f"EdgeColoredBipartiteGraph({len(self.left)}+{len(self.right)})"


class EdgeColoredTripartite3Graph:
    """Tripartite 3-graph with every cross triple colored 0, 1 or 2."""

    __slots__ = ("parts", "colors")

    def __init__(self, parts, colors):
        self.parts = tuple(tuple(p) for p in parts)
        if len(self.parts) != 3:
            raise ValueError("need exactly three parts")
        colors = np.asarray(colors, dtype=np.int8)
        shape = tuple(len(p) for p in self.parts)
        if colors.shape != shape:
            raise ValueError("color tensor shape mismatch")
        if colors.size and (colors.min() < 0 or colors.max() > 2):
            raise ValueError("colors must be in {0,1,2}")
        colors = colors.copy()
        colors.setflags(write=False)
        self.colors = colors


class Triad:
    """3-partite graph assembled from three bipartite pair graphs.

    ``pair_ij`` joins parts[0]-parts[1], ``pair_is`` joins parts[0]-parts[2]
    and ``pair_js`` joins parts[1]-parts[2].  ``address`` optionally records
    (i, j, s, alpha, beta, gamma) within an owning decomposition.
    """

    __slots__ = ("parts", "pair_ij", "pair_is", "pair_js", "address")

    def __init__(self, parts, pair_ij: BipartiteGraph, pair_is: BipartiteGraph,
                 pair_js: BipartiteGraph, address=None):
        self.parts = tuple(tuple(p) for p in parts)
        if len(self.parts) != 3:
            raise ValueError("need exactly three parts")
        vi, vj, vs = self.parts
        if pair_ij.left != vi or pair_ij.right != vj:
            raise ValueError("pair_ij must join parts[0] and parts[1]")
        if pair_is.left != vi or pair_is.right != vs:
            raise ValueError("pair_is must join parts[0] and parts[2]")
        if pair_js.left != vj or pair_js.right != vs:
            raise ValueError("pair_js must join parts[1] and parts[2]")
        self.pair_ij = pair_ij
        self.pair_is = pair_is
        self.pair_js = pair_js
        self.address = tuple(address) if address is not None else None

    def matrices(self):
        return self.pair_ij.matrix(), self.pair_is.matrix(), self.pair_js.matrix()

    def sizes(self):
        return tuple(len(p) for p in self.parts)

    def __repr__(self):
        return f"Triad(sizes={self.sizes()}, address={self.address})"


# ---------------------------------------------------------------------------
# decompositions


class Decomposition:
    """Vertex equipartition plus per-pair-class edge partitions.

    ``vertex_parts`` is a list of t disjoint vertex tuples covering
    {0..n-1}; ``pair_parts[(i, j)]`` (i < j) is the list of edge sets
    partitioning K2[V_i, V_j].  Equitability is checkable but not enforced.
    """

    __slots__ = ("n", "vertex_parts", "pair_parts", "_vpart", "_vlocal",
                 "_part_mats", "_pair_graphs")

    def __init__(self, n: int, vertex_parts, pair_parts):
        self.n = int(n)
        self.vertex_parts = tuple(tuple(int(v) for v in p) for p in vertex_parts)
        pp = {}
        for key, parts in pair_parts.items():
            i, j = key
            if not 0 <= i < j < len(self.vertex_parts):
                raise ValueError(f"bad pair-class key {key}")
            pp[(i, j)] = tuple(frozenset((int(u), int(w)) for u, w in part) for part in parts)
        self.pair_parts = pp
        vpart = np.full(self.n, -1, dtype=np.int32)
        vlocal = np.full(self.n, -1, dtype=np.int32)
        for pi, part in enumerate(self.vertex_parts):
            for loc, v in enumerate(part):
                if not 0 <= v < self.n:
                    raise ValueError(f"vertex {v} out of range")
                if vpart[v] != -1:
                    raise ValueError(f"vertex {v} appears in two parts")
                vpart[v] = pi
                vlocal[v] = loc
        vpart.setflags(write=False)
        vlocal.setflags(write=False)
        self._vpart = vpart
        self._vlocal = vlocal
        self._part_mats = {}
        self._pair_graphs = {}

    @property
    def t(self) -> int:
        return len(self.vertex_parts)

    def ell_of(self, i: int, j: int) -> int:
        return len(self.pair_parts[(min(i, j), max(i, j))])

    @property
    def ell(self) -> int:
        """Nominal ell: maximum part count over pair classes."""
        if not self.pair_parts:
            return 0
        return max(len(v) for v in self.pair_parts.values())

    def vertex_part_of(self, v: int) -> int:
        return int(self._vpart[v])

    @property
    def vertex_part_array(self) -> np.ndarray:
        return self._vpart

    @property
    def vertex_local_array(self) -> np.ndarray:
        return self._vlocal

    def part_matrix(self, i: int, j: int) -> np.ndarray:
        """int16 matrix over V_i x V_j giving each pair's part index (-1 if
        uncovered); cached."""
        key = (min(i, j), max(i, j))
        if key not in self._part_mats:
            vi, vj = self.vertex_parts[key[0]], self.vertex_parts[key[1]]
            li = {v: a for a, v in enumerate(vi)}
            lj = {v: a for a, v in enumerate(vj)}
            mat = np.full((len(vi), len(vj)), -1, dtype=np.int16)
            for alpha, part in enumerate(self.pair_parts[key]):
                for u, w in part:
                    mat[li[u], lj[w]] = alpha
            mat.setflags(write=False)
            self._part_mats[key] = mat
        return self._part_mats[key]

    def pair_graph(self, i: int, j: int, alpha: int) -> BipartiteGraph:
        """The bipartite graph (V_i, V_j, P^alpha_ij); cached."""
        key = (min(i, j), max(i, j), alpha)
        if key not in self._pair_graphs:
            ci, cj, a = key
            g = BipartiteGraph(self.vertex_parts[ci], self.vertex_parts[cj],
                               self.pair_parts[(ci, cj)][a])
            self._pair_graphs[key] = g
        return self._pair_graphs[key]

    def triad(self, i: int, j: int, s: int, alpha: int, beta: int, gamma: int) -> Triad:
        i, j, s = sorted((i, j, s))
        return Triad(
            (self.vertex_parts[i], self.vertex_parts[j], self.vertex_parts[s]),
            self.pair_graph(i, j, alpha),
            self.pair_graph(i, s, beta),
            self.pair_graph(j, s, gamma),
            address=(i, j, s, alpha, beta, gamma),
        )

    def pair_classes(self):
        return sorted(self.pair_parts.keys())

    def triple_classes(self):
        t = self.t
        return [(i, j, s) for i in range(t) for j in range(i + 1, t) for s in range(j + 1, t)]

    def __repr__(self):
        return f"Decomposition(n={self.n}, t={self.t}, ell={self.ell})"


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {"ok": self.ok, "violations": list(self.violations),
                "warnings": list(self.warnings)}


def validate_decomposition(h: Hypergraph3 | int, p: Decomposition) -> ValidationReport:
    """Structural validation: vertex parts partition V, every pair class is
    exactly partitioned, edges are oriented low-class -> high-class.

    Violations are data, not errors.  Empty vertex or pair parts are
    reported as warnings.
    """
    n = h.n if isinstance(h, Hypergraph3) else int(h)
    violations = []
    warnings = []
    if p.n != n:
        violations.append(("vertex_count", None, f"decomposition n={p.n} != {n}"))
    seen = {}
    for pi, part in enumerate(p.vertex_parts):
        if not part:
            warnings.append(("empty_vertex_part", pi, "vertex part is empty"))
        for v in part:
            if v in seen:
                violations.append(("vertex_overlap", v, f"in parts {seen[v]} and {pi}"))
            seen[v] = pi
            if not 0 <= v < n:
                violations.append(("vertex_range", v, "out of range"))
    missing = [v for v in range(n) if v not in seen]
    if missing:
        violations.append(("vertex_cover", missing[:10], f"{len(missing)} vertices uncovered"))

    t = p.t
    expected_keys = {(i, j) for i in range(t) for j in range(i + 1, t)}
    got_keys = set(p.pair_parts.keys())
    for key in sorted(expected_keys - got_keys):
        violations.append(("missing_pair_class", key, "no partition supplied"))
    for key in sorted(got_keys - expected_keys):
        violations.append(("unexpected_pair_class", key, "key outside class range"))

    for (i, j) in sorted(got_keys & expected_keys):
        vi = set(p.vertex_parts[i])
        vj = set(p.vertex_parts[j])
        target = len(vi) * len(vj)
        covered = 0
        seen_pairs = set()
        for alpha, part in enumerate(p.pair_parts[(i, j)]):
            if not part:
                warnings.append(("empty_pair_part", (i, j, alpha), "pair part is empty"))
            for u, w in part:
                if u not in vi or w not in vj:
                    violations.append(("orientation", (i, j, alpha, u, w),
                                       "edge does not cross V_i -> V_j"))
                    continue
                if (u, w) in seen_pairs:
                    violations.append(("overlap", (i, j), f"pair ({u},{w}) in two parts"))
                else:
                    seen_pairs.add((u, w))
                    covered += 1
        if covered != target:
            violations.append(("coverage", (i, j),
                               f"{covered} of {target} pairs covered"))
    return ValidationReport(ok=not violations, violations=violations, warnings=warnings)


def parse_decomposition(text: str) -> Decomposition:
    """Parse the JSON decomposition format.

    Expected fields: ``n``, ``vertex_parts: [[int]]`` and
    ``pair_parts: {"i,j": [[[u, w], ...], ...]}``.
    """
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("top-level value must be an object")
    for fld in ("n", "vertex_parts", "pair_parts"):
        if fld not in doc:
            raise ParseError(f"missing field {fld!r}")
    try:
        pair_parts = {}
        for key, parts in doc["pair_parts"].items():
            i, j = (int(x) for x in key.split(","))
            pair_parts[(i, j)] = [[(int(u), int(w)) for u, w in part] for part in parts]
        return Decomposition(int(doc["n"]), doc["vertex_parts"], pair_parts)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad decomposition document: {exc}") from None


def serialize_decomposition(p: Decomposition) -> str:
    import json

    doc = {
        "n": p.n,
        "vertex_parts": [sorted(part) for part in p.vertex_parts],
        "pair_parts": {
            f"{i},{j}": [sorted([list(e) for e in part]) for part in p.pair_parts[(i, j)]]
            for (i, j) in p.pair_classes()
        },
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"
