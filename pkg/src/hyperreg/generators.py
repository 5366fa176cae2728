"""Seeded synthetic-instance generators.

Every generator is a pure function of (parameters, seed).  Randomness comes
from numpy's PCG64 via ``SeedSequence(entropy=seed, spawn_key=(TAG, ...))``
substreams, one tag per generator stage and one spawn key per indexed
object (pair class, part triple, attempt), so regenerating any instance is
bit-exact for a fixed numpy version and independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import BipartiteGraph, Decomposition, EdgeColoredBipartiteGraph, Hypergraph3, Triad

# spawn-key tags for substream derivation
_TAG_BIPARTITE = 1
_TAG_PAIR_SPLIT = 2
_TAG_GROUPS = 3
_TAG_TRIAD_NOISE = 4
_TAG_TRIPLES = 5
_TAG_CLUSTER_PROTO = 6
_TAG_CLUSTER_MEMBERS = 7
_TAG_IP2 = 8
_TAG_TRIAD_GRAPH = 9


def substream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic substream for (seed, key...)."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key)))


def _hypergraph_from_sorted_rows(n: int, rows: np.ndarray) -> Hypergraph3:
    """Fast private constructor: rows must be strictly increasing triples."""
    h = Hypergraph3.__new__(Hypergraph3)
    h.n = int(n)
    if rows.size:
        if rows.min() < 0 or rows.max() >= n:
            raise ValueError("vertex out of range")
        if not ((rows[:, 0] < rows[:, 1]) & (rows[:, 1] < rows[:, 2])).all():
            raise ValueError("rows must be strictly increasing triples")
        keys = (rows[:, 0].astype(np.int64) * n + rows[:, 1]) * n + rows[:, 2]
        h._keys = frozenset(keys.tolist())
    else:
        h._keys = frozenset()
    h._array = None
    h._keys_arr = None
    return h


def gen_random_bipartite(nu: int, nw: int, p: Fraction, seed: int) -> BipartiteGraph:
    """Independent cross pairs with probability p; left ids 0..nu-1, right
    ids nu..nu+nw-1."""
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = substream(seed, _TAG_BIPARTITE, nu, nw)
    mat = rng.random((nu, nw)) < p
    left = list(range(nu))
    right = list(range(nu, nu + nw))
    edges = [(int(u), int(nu + w)) for u, w in zip(*np.nonzero(mat))]
    return BipartiteGraph(left, right, edges)


def gen_random_triad(n1: int, n2: int, n3: int, p: Fraction, seed: int) -> Triad:
    """Three independent random pair graphs assembled into a triad."""
    p = float(p)
    rng = substream(seed, _TAG_TRIAD_GRAPH, n1, n2, n3)
    v1 = list(range(n1))
    v2 = list(range(n1, n1 + n2))
    v3 = list(range(n1 + n2, n1 + n2 + n3))
    mats = [rng.random(shape) < p for shape in ((n1, n2), (n1, n3), (n2, n3))]

    def edges(mat, left, right):
        return [(left[a], right[b]) for a, b in zip(*np.nonzero(mat))]

    return Triad(
        (v1, v2, v3),
        BipartiteGraph(v1, v2, edges(mats[0], v1, v2)),
        BipartiteGraph(v1, v3, edges(mats[1], v1, v3)),
        BipartiteGraph(v2, v3, edges(mats[2], v2, v3)),
    )


# ---------------------------------------------------------------------------
# planted decompositions


def two_level_profile(groups: int, hi: Fraction, lo: Fraction,
                      rule: str = "parity") -> dict:
    """Group-triple density profile taking only the values hi and lo.

    parity: hi iff the group labels sum to an even number (both values occur
    for groups >= 2); all_equal: hi iff all three labels agree.
    """
    hi = Fraction(hi)
    lo = Fraction(lo)
    out = {}
    for g1 in range(groups):
        for g2 in range(groups):
            for g3 in range(groups):
                if rule == "parity":
                    val = hi if (g1 + g2 + g3) % 2 == 0 else lo
                elif rule == "all_equal":
                    val = hi if g1 == g2 == g3 else lo
                else:
                    raise ValueError(f"unknown profile rule {rule!r}")
                out[(g1, g2, g3)] = val
    return out


@dataclass
class GroundTruth:
    group_labels: dict          # (i, j) -> tuple of group per part index
    planted_probs: dict         # (i, j, s, alpha, beta, gamma) -> float
    profile: dict               # group triple -> Fraction
    noise: float
    params: dict = field(default_factory=dict)


@dataclass
class PlantedInstance:
    hypergraph: Hypergraph3
    decomposition: Decomposition
    ground_truth: GroundTruth
    seed: int


def _equipartition(n: int, t: int) -> list[list[int]]:
    sizes = [n // t + (1 if i < n % t else 0) for i in range(t)]
    parts = []
    start = 0
    for s in sizes:
        parts.append(list(range(start, start + s)))
        start += s
    return parts


def gen_planted_decomposition(n: int, t: int, ell: int, groups_per_pair: int,
                              density_profile: dict, noise: float,
                              seed: int) -> PlantedInstance:
    """Planted regular homogeneous instance.

    Vertex classes are contiguous index blocks (sizes differ by at most 1).
    Each cross pair set is split ell ways uniformly at random, parts are
    assigned to behavior groups as evenly as possible, and each cross triple
    enters the hypergraph independently with the probability its triad's
    group triple prescribes, shifted per triad by a uniform draw in
    [-noise, +noise].  The realized per-triad probabilities and group labels
    are recorded as ground truth.
    """
    if not (t >= 2 and ell >= 1 and groups_per_pair >= 1):
        raise ValueError("need t >= 2, ell >= 1, groups >= 1")
    if groups_per_pair > ell:
        raise ValueError("more groups than parts per pair")
    vertex_parts = _equipartition(n, t)
    profile = {k: Fraction(v) for k, v in density_profile.items()}

    # ell-way uniform split of each pair class + balanced group labels
    pair_parts = {}
    assign = {}
    group_labels = {}
    for i in range(t):
        for j in range(i + 1, t):
            rng = substream(seed, _TAG_PAIR_SPLIT, i, j)
            vi, vj = vertex_parts[i], vertex_parts[j]
            amat = rng.integers(0, ell, size=(len(vi), len(vj)))
            parts = [[] for _ in range(ell)]
            for a, b in np.ndindex(amat.shape):
                parts[int(amat[a, b])].append((vi[a], vj[b]))
            pair_parts[(i, j)] = parts
            assign[(i, j)] = amat
            grng = substream(seed, _TAG_GROUPS, i, j)
            labels = np.array([g % groups_per_pair for g in range(ell)])
            grng.shuffle(labels)
            group_labels[(i, j)] = tuple(int(x) for x in labels)

    # per-triad inclusion probabilities, then per-triple Bernoulli draws
    planted_probs = {}
    all_rows = []
    offsets = [part[0] for part in vertex_parts]
    for i in range(t):
        for j in range(i + 1, t):
            for s in range(j + 1, t):
                lab_ij = group_labels[(i, j)]
                lab_is = group_labels[(i, s)]
                lab_js = group_labels[(j, s)]
                nrng = substream(seed, _TAG_TRIAD_NOISE, i, j, s)
                probs = np.zeros((ell, ell, ell))
                for a in range(ell):
                    for b in range(ell):
                        for c in range(ell):
                            p0 = float(profile[(lab_ij[a], lab_is[b], lab_js[c])])
                            if noise:
                                p0 = min(1.0, max(0.0, p0 + nrng.uniform(-noise, noise)))
                            probs[a, b, c] = p0
                            planted_probs[(i, j, s, a, b, c)] = p0
                code = (assign[(i, j)][:, :, None] * ell
                        + assign[(i, s)][:, None, :]) * ell + assign[(j, s)][None, :, :]
                trng = substream(seed, _TAG_TRIPLES, i, j, s)
                u = trng.random(code.shape)
                hit = u < probs.ravel()[code]
                xs, ys, zs = np.nonzero(hit)
                rows = np.stack([xs + offsets[i], ys + offsets[j], zs + offsets[s]],
                                axis=1).astype(np.int64)
                all_rows.append(rows)
    rows = np.concatenate(all_rows) if all_rows else np.zeros((0, 3), dtype=np.int64)
    h = _hypergraph_from_sorted_rows(n, rows)
    decomp = Decomposition(n, vertex_parts, pair_parts)
    gt = GroundTruth(group_labels=group_labels, planted_probs=planted_probs,
                     profile=profile, noise=float(noise),
                     params={"n": n, "t": t, "ell": ell,
                             "groups_per_pair": groups_per_pair})
    return PlantedInstance(hypergraph=h, decomposition=decomp,
                           ground_truth=gt, seed=int(seed))


# ---------------------------------------------------------------------------
# clustered edge-colored bipartite instances


def gen_clustered_colored(a: int, b: int, clusters: int, sep: Fraction,
                          eps2_mass: Fraction, seed: int,
                          flip_rate: Fraction | None = None):
    """(graph, labels): left vertices copy one of ``clusters`` prototype 0/1
    colorings, with per-entry flips and an eps2_mass fraction recolored 2.

    Prototypes are rejected until pairwise Hamming distance is at least
    sep*b.  The flip rate defaults to sep/24 (anything <= sep/8 keeps
    members well inside their own prototype's half-radius).
    """
    sep = float(sep)
    eps2_mass = float(eps2_mass)
    if not 0 < sep < 1:
        raise ValueError("sep must lie in (0, 1)")
    if clusters > a:
        raise ValueError("more clusters than left vertices")
    flip = float(flip_rate) if flip_rate is not None else sep / 24
    if flip > sep / 8:
        raise ValueError("flip_rate must be at most sep/8")
    prng = substream(seed, _TAG_CLUSTER_PROTO, a, b, clusters)
    min_dist = int(np.ceil(sep * b))
    protos = []
    attempts = 0
    while len(protos) < clusters:
        cand = prng.random(b) < 0.5
        if all(int((cand != p).sum()) >= min_dist for p in protos):
            protos.append(cand)
        attempts += 1
        if attempts > 200 * clusters:
            raise ValueError("infeasible separation: prototype rejection failed")
    protos = np.array(protos)

    mrng = substream(seed, _TAG_CLUSTER_MEMBERS, a, b, clusters)
    labels = np.array([i % clusters for i in range(a)])
    mrng.shuffle(labels)
    rows = protos[labels]
    flips = mrng.random((a, b)) < flip
    bits = rows ^ flips
    colors = np.where(bits, 1, 0).astype(np.int8)
    if eps2_mass > 0:
        recolor = mrng.random((a, b)) < eps2_mass
        colors[recolor] = 2
    g = EdgeColoredBipartiteGraph(list(range(a)), list(range(a, a + b)), colors)
    return g, [int(x) for x in labels]


# ---------------------------------------------------------------------------
# grid-shattering witnesses


def gen_ip2_hypergraph(k: int, n_extra: int = 0, seed: int = 0) -> Hypergraph3:
    """Explicit grid-shattering witness: vertices a_1..a_k, b_1..b_k and c_S
    for every S over the k*k index grid, with edges a_i b_j c_S exactly for
    (i, j) in S, plus n_extra isolated vertices.  Labels are permuted by the
    seed."""
    if not 1 <= k <= 3:
        raise ValueError("vertex budget limits k to at most 3")
    total = 2 * k + (1 << (k * k)) + int(n_extra)
    rng = substream(seed, _TAG_IP2, k, n_extra)
    perm = rng.permutation(total)
    a = [int(perm[i]) for i in range(k)]
    b = [int(perm[k + j]) for j in range(k)]
    c = [int(perm[2 * k + s]) for s in range(1 << (k * k))]
    triples = []
    for s in range(1 << (k * k)):
        for i in range(k):
            for j in range(k):
                if s >> (i * k + j) & 1:
                    triples.append((a[i], b[j], c[s]))
    return Hypergraph3(total, triples)
