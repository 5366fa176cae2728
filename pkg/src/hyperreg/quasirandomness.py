"""Quasirandomness statistics for bipartite graphs and 3-partite 3-graphs.

The two-level statistic is the normalized four-fold product sum of the
centered edge indicator g = 1[edge] - density; the three-level statistic is
the eight-fold product sum of the centered triangle indicator h over a
3-partite scaffold.  Every statistic has a brute-force enumeration path and
an algebraically identical accelerated path; both are exact rationals and
agree bit-for-bit.

Scaling convention: with D = |U||W| and e = |E|, the integer matrix
G = D*A - e satisfies g = G/D, so all sums are computed over integers and
divided once at the end.  The same trick at the triple level uses the
triangle count as denominator (reduced by a gcd).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    BipartiteGraph,
    EmptySideError,
    Hypergraph3,
    OversizeError,
    Triad,
)
from .exactmath import le_root_sum, root_bracket

DISC2_EXACT_LIMIT = 28  # |U| + |W| bound for exact subset enumeration
FLOAT_TOL = Fraction(1, 10**9)


# ---------------------------------------------------------------------------
# dev2


@dataclass
class Dev2Result:
    density: Fraction
    raw_sum: Fraction
    normalized: Fraction
    exact: bool = True

    def min_eps(self, d: Fraction | None = None) -> Fraction:
        """Smallest eps certified at target density d (default: own density)."""
        if d is None:
            return self.normalized
        return max(abs(self.density - Fraction(d)), self.normalized)


def _scaled_int_matrix(mat: np.ndarray) -> tuple[list[list[int]], int, int]:
    """(G, e, D) with G[u][w] = D*A - e as Python ints."""
    nu, nw = mat.shape
    d_tot = nu * nw
    e = int(mat.sum())
    g = [[d_tot * int(mat[u, w]) - e for w in range(nw)] for u in range(nu)]
    return g, e, d_tot


def _dev2_brute_total(mat: np.ndarray) -> tuple[int, int, int]:
    """Quadruple-sum numerator by direct enumeration (oracle path)."""
    g, e, d_tot = _scaled_int_matrix(mat)
    nu, nw = mat.shape
    total = 0
    for u0 in range(nu):
        gu0 = g[u0]
        for u1 in range(nu):
            gu1 = g[u1]
            for w0 in range(nw):
                a = gu0[w0] * gu1[w0]
                if a == 0:
                    continue
                for w1 in range(nw):
                    total += a * gu0[w1] * gu1[w1]
    return total, e, d_tot


def _dev2_fast_total(mat: np.ndarray) -> tuple[int, int, int]:
    """Quadruple-sum numerator via the pair-collapse identity.

    sum over quadruples = sum_{u0,u1} ( sum_w G(u0,w) G(u1,w) )^2 with
    G = D*A - e, and the inner sum expands through codegrees:
    D^2*codeg - D*e*(deg0 + deg1) + e^2*|W|.
    """
    nu, nw = mat.shape
    d_tot = nu * nw
    ad = mat.astype(np.int64)
    e = int(ad.sum())
    # int64 bound on inner entries: 4 * D^2 * nw = 4 nu^2 nw^3
    if 4 * (d_tot**2) * nw < 2**62:
        codeg = ad @ ad.T
        deg = ad.sum(axis=1)
        inner = (d_tot * d_tot) * codeg - (d_tot * e) * (deg[:, None] + deg[None, :]) \
            + (e * e) * nw
        total = 0
        for x in inner.ravel().tolist():
            total += x * x
    else:
        # big-int fallback, same identity
        rows = [[int(v) for v in row] for row in mat]
        deg = [sum(r) for r in rows]
        total = 0
        for u0 in range(nu):
            r0 = rows[u0]
            for u1 in range(nu):
                r1 = rows[u1]
                codeg = sum(a & b for a, b in zip(r0, r1))
                inner = d_tot * d_tot * codeg - d_tot * e * (deg[u0] + deg[u1]) + e * e * nw
                total += inner * inner
    return total, e, d_tot


def dev2_from_matrix(mat: np.ndarray, mode: str = "fast") -> Dev2Result:
    nu, nw = mat.shape
    if nu == 0 or nw == 0:
        raise EmptySideError("dev2 requires nonempty sides")
    if mode == "brute":
        total, e, d_tot = _dev2_brute_total(mat)
    elif mode == "fast":
        total, e, d_tot = _dev2_fast_total(mat)
    elif mode == "float":
        return _dev2_float(mat)
    else:
        raise ValueError(f"unknown dev2 mode {mode!r}")
    density = Fraction(e, d_tot)
    raw = Fraction(total, d_tot**4)
    return Dev2Result(density=density, raw_sum=raw,
                      normalized=Fraction(total, d_tot**6))


def _dev2_float(mat: np.ndarray) -> Dev2Result:
    """Opt-in floating path for large sides (tolerance ~1e-9)."""
    a = mat.astype(np.float64)
    nu, nw = a.shape
    e = float(a.sum())
    d = e / (nu * nw)
    g = a - d
    inner = g @ g.T
    raw = float((inner * inner).sum())
    density = Fraction(e / (nu * nw)).limit_denominator(10**12)
    raw_f = Fraction(raw).limit_denominator(10**12)
    return Dev2Result(density=density, raw_sum=raw_f,
                      normalized=raw_f / (nu * nu * nw * nw), exact=False)


def dev2(b: BipartiteGraph, mode: str = "fast") -> Dev2Result:
    """Four-cycle deviation statistic of a bipartite graph."""
    return dev2_from_matrix(b.matrix(), mode=mode)


def has_dev2(b: BipartiteGraph | Dev2Result, eps: Fraction, d: Fraction,
             mode: str = "fast") -> bool:
    """density within eps of d (strict) and normalized sum at most eps."""
    res = b if isinstance(b, Dev2Result) else dev2(b, mode=mode)
    eps = Fraction(eps)
    d = Fraction(d)
    return abs(res.density - d) < eps and res.normalized <= eps


def min_dev2_eps(b: BipartiteGraph | Dev2Result, d: Fraction | None = None) -> Fraction:
    """Infimum of eps for which the dev2 predicate at density d holds."""
    res = b if isinstance(b, Dev2Result) else dev2(b)
    return res.min_eps(d)


# ---------------------------------------------------------------------------
# disc2


@dataclass
class Disc2Result:
    density: Fraction
    defect: Fraction
    mode: str
    witness: tuple | None = None
    trials: int = 0


def _disc_defect_exact(mat: np.ndarray, d: Fraction):
    """Maximize |e(U',W') - d|U'||W'|| / (|U||W|) over all subset pairs.

    For a fixed subset of one side the optimal subset of the other side is
    sign-determined, so only the smaller side is enumerated.
    """
    nu, nw = mat.shape
    transposed = nw < nu
    work = mat.T if transposed else mat
    ns, no = work.shape
    p, q = d.numerator, d.denominator
    # bitmask of each "other"-side vertex's neighborhood within the enum side
    masks = []
    for w in range(no):
        m = 0
        for u in range(ns):
            if work[u, w]:
                m |= 1 << u
        masks.append(m)
    best = 0
    best_wit = (0, (), 1)
    for sub in range(1 << ns):
        k = sub.bit_count()
        pk = p * k
        pos = 0
        neg = 0
        for w, mw in enumerate(masks):
            val = q * (mw & sub).bit_count() - pk
            if val > 0:
                pos += val
            else:
                neg += val
        if pos > best:
            best = pos
            best_wit = (sub, tuple(w for w, mw in enumerate(masks)
                                   if q * (mw & sub).bit_count() - pk > 0), 1)
        if -neg > best:
            best = -neg
            best_wit = (sub, tuple(w for w, mw in enumerate(masks)
                                   if q * (mw & sub).bit_count() - pk < 0), -1)
    d_tot = nu * nw
    defect = Fraction(best, q * d_tot)
    sub, others, _sign = best_wit
    enum_sel = tuple(u for u in range(ns) if sub >> u & 1)
    if transposed:
        witness = (others, enum_sel)
    else:
        witness = (enum_sel, others)
    return defect, witness


def disc2(b: BipartiteGraph, mode: str = "exact", trials: int = 1000,
          seed: int = 0) -> Disc2Result:
    """Discrepancy statistic: worst subset-pair density defect.

    Exact mode enumerates subsets (requires |U|+|W| <= 28); sampled mode
    maximizes over seeded random subset pairs and therefore lower-bounds the
    exact defect.
    """
    mat = b.matrix()
    nu, nw = mat.shape
    if nu == 0 or nw == 0:
        raise EmptySideError("disc2 requires nonempty sides")
    d = b.density
    if mode == "exact":
        if nu + nw > DISC2_EXACT_LIMIT:
            raise OversizeError(
                f"exact disc2 limited to {DISC2_EXACT_LIMIT} total vertices")
        defect, wit_idx = _disc_defect_exact(mat, d)
        witness = (tuple(b.left[i] for i in wit_idx[0]),
                   tuple(b.right[i] for i in wit_idx[1]))
        return Disc2Result(density=d, defect=defect, mode="exact", witness=witness)
    if mode != "sampled":
        raise ValueError(f"unknown disc2 mode {mode!r}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
    p, q = d.numerator, d.denominator
    d_tot = nu * nw
    best = Fraction(0)
    a64 = mat.astype(np.int64)
    for _ in range(int(trials)):
        su = rng.random(nu) < 0.5
        sw = rng.random(nw) < 0.5
        inter = int(a64[su][:, sw].sum())
        k = int(su.sum()) * int(sw.sum())
        num = abs(q * inter - p * k)
        val = Fraction(num, q * d_tot)
        if val > best:
            best = val
    return Disc2Result(density=d, defect=best, mode="sampled", trials=int(trials))


@dataclass
class EquivalenceResult:
    dev_eps: Fraction
    disc_eps: Fraction
    ok: bool


def check_equivalence(b: BipartiteGraph, d: Fraction) -> EquivalenceResult:
    """Exact check that the discrepancy defect is at most dev_eps**(1/4)."""
    mat = b.matrix()
    if mat.shape[0] + mat.shape[1] > DISC2_EXACT_LIMIT:
        raise OversizeError("check_equivalence needs exact disc2 feasibility")
    d = Fraction(d)
    res = dev2_from_matrix(mat)
    dev_eps = res.min_eps(d)
    disc_eps, _ = _disc_defect_exact(mat, d)
    ok = disc_eps**4 <= dev_eps
    return EquivalenceResult(dev_eps=dev_eps, disc_eps=disc_eps, ok=ok)


# ---------------------------------------------------------------------------
# triangles of a triad


def triangle_tensor(g: Triad) -> np.ndarray:
    """Boolean tensor over local indices: T[a,b,c] iff the cross triple is a
    triangle of the triad."""
    a_ij, a_is, a_js = g.matrices()
    return a_ij[:, :, None] & a_is[:, None, :] & a_js[None, :, :]


def triangle_count(g: Triad) -> int:
    return int(triangle_tensor(g).sum())


def triangle_set(g: Triad) -> set[tuple[int, int, int]]:
    """Materialized triangle triples in part order (vi, vj, vs)."""
    t = triangle_tensor(g)
    vi, vj, vs = g.parts
    out = set()
    for a, b, c in zip(*np.nonzero(t)):
        out.add((vi[a], vj[b], vs[c]))
    return out


def membership_tensor(h: Hypergraph3, g: Triad) -> np.ndarray:
    """Boolean tensor: which cross triples of the triad are edges of h."""
    vi, vj, vs = (np.asarray(p, dtype=np.int64) for p in g.parts)
    n = h.n
    x = np.broadcast_to(vi[:, None, None], (len(vi), len(vj), len(vs)))
    y = np.broadcast_to(vj[None, :, None], x.shape)
    z = np.broadcast_to(vs[None, None, :], x.shape)
    stacked = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    stacked = np.sort(stacked, axis=1)
    keys = (stacked[:, 0] * n + stacked[:, 1]) * n + stacked[:, 2]
    return h.contains_keys(keys).reshape(x.shape)


# ---------------------------------------------------------------------------
# dev23


@dataclass
class Dev23Result:
    d3: Fraction
    d2_per_pair: tuple
    raw_sum: Fraction
    normalized_bound_lhs: Fraction
    pair_dev2: tuple
    triangle_count: int
    edge_count: int
    exact: bool = True


def _scaled_h_tensor(t: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, int]:
    """(Hm, den) with h = Hm/den: Hm = den*R - (ke/g)*T after gcd reduction."""
    kt = int(t.sum())
    ke = int(r.sum())
    if kt == 0:
        return np.zeros(t.shape, dtype=np.int64), 1
    g = math.gcd(kt, ke) or 1
    den = kt // g
    hm = den * r.astype(np.int64) - (ke // g) * t.astype(np.int64)
    return hm, den


def _dev23_brute_total(hm: np.ndarray) -> int:
    n1, n2, n3 = hm.shape
    h = hm.tolist()
    total = 0
    for u0 in range(n1):
        hu0 = h[u0]
        for u1 in range(n1):
            hu1 = h[u1]
            for w0 in range(n2):
                h00, h10 = hu0[w0], hu1[w0]
                for w1 in range(n2):
                    h01, h11 = hu0[w1], hu1[w1]
                    for z0 in range(n3):
                        a = h00[z0] * h01[z0] * h10[z0] * h11[z0]
                        if a == 0:
                            continue
                        for z1 in range(n3):
                            total += a * h00[z1] * h01[z1] * h10[z1] * h11[z1]
    return total


def _frob_sq_exact(m: np.ndarray, den: int, n2: int) -> int:
    """sum of squared entries of M @ M.T, exact.

    Direct int64 when n2 * den^4 stays below 2^62; otherwise M is split into
    high/low halves so every partial matmul fits in int64, and entries are
    recombined as Python ints.
    """
    if den == 0:
        den = 1
    if n2 * (den**4) < 2**62:
        p = m @ m.T
        total = 0
        for x in p.ravel().tolist():
            total += x * x
        return total
    shift = max(1, (max(1, int(den * den)).bit_length() + 1) // 2)
    half = 1 << shift
    a = np.floor_divide(m, half)
    b = m - a * half
    paa = (a @ a.T).ravel().tolist()
    pab = (a @ b.T + b @ a.T).ravel().tolist()
    pbb = (b @ b.T).ravel().tolist()
    total = 0
    four_s = half * half
    for xaa, xab, xbb in zip(paa, pab, pbb):
        v = xaa * four_s + xab * half + xbb
        total += v * v
    return total


def _dev23_fast_total(hm: np.ndarray, den: int) -> int:
    n1, n2, n3 = hm.shape
    total = 0
    for z0 in range(n3):
        s0 = hm[:, :, z0]
        for z1 in range(z0, n3):
            m = s0 * hm[:, :, z1]
            contrib = _frob_sq_exact(m, den, n2)
            total += contrib if z0 == z1 else 2 * contrib
    return total


def dev23(h: Hypergraph3, g: Triad, mode: str = "fast") -> Dev23Result:
    """Eight-fold deviation statistic of (h restricted to the triad, triad).

    The empty-triangle-set case is defined as d3 = 0, raw_sum = 0.
    """
    t = triangle_tensor(g)
    r = t & membership_tensor(h, g)
    kt = int(t.sum())
    ke = int(r.sum())
    n1, n2, n3 = t.shape
    pair_res = tuple(dev2_from_matrix(m) for m in g.matrices())
    d2s = tuple(pr.density for pr in pair_res)
    if kt == 0:
        return Dev23Result(d3=Fraction(0), d2_per_pair=d2s, raw_sum=Fraction(0),
                           normalized_bound_lhs=Fraction(0), pair_dev2=pair_res,
                           triangle_count=0, edge_count=0)
    hm, den = _scaled_h_tensor(t, r)
    if mode == "brute":
        total = _dev23_brute_total(hm)
    elif mode == "fast":
        total = _dev23_fast_total(hm, den)
    else:
        raise ValueError(f"unknown dev23 mode {mode!r}")
    raw = Fraction(total, den**8)
    nsq = (n1 * n2 * n3) ** 2
    return Dev23Result(d3=Fraction(ke, kt), d2_per_pair=d2s, raw_sum=raw,
                       normalized_bound_lhs=raw / nsq, pair_dev2=pair_res,
                       triangle_count=kt, edge_count=ke)


def dev23_regular(h: Hypergraph3, g: Triad, eps1: Fraction, eps2: Fraction,
                  d2: Fraction | None = None, result: Dev23Result | None = None):
    """(ok, result, d2_used): the dev23 predicate at (eps1, eps2).

    d2 defaults to the arithmetic mean of the three pair densities.
    """
    res = result if result is not None else dev23(h, g)
    if d2 is None:
        d2 = sum(res.d2_per_pair, Fraction(0)) / 3
    d2 = Fraction(d2)
    eps1 = Fraction(eps1)
    eps2 = Fraction(eps2)
    pairs_ok = all(has_dev2(pr, eps2, d2) for pr in res.pair_dev2)
    n1, n2, n3 = (len(p) for p in g.parts)
    bound = eps1 * d2**12 * Fraction((n1 * n2 * n3) ** 2)
    ok = pairs_ok and res.raw_sum <= bound
    return ok, res, d2


def has_dev23(h: Hypergraph3, g: Triad, eps1: Fraction, eps2: Fraction,
              d2: Fraction | None = None) -> bool:
    ok, _, _ = dev23_regular(h, g, eps1, eps2, d2=d2)
    return ok


# ---------------------------------------------------------------------------
# octahedron counts


def _k222_total(t3: np.ndarray) -> int:
    """Ordered 6-tuples (u0,u1,w0,w1,z0,z1) with all 8 mixed triples marked."""
    n1, n2, n3 = t3.shape
    sl = t3.astype(np.int64)
    total = 0
    for z0 in range(n3):
        s0 = sl[:, :, z0]
        for z1 in range(z0, n3):
            m = s0 * sl[:, :, z1]
            p = m @ m.T
            contrib = int((p * p).sum(dtype=np.int64)) if p.size < 2**20 \
                else sum(x * x for x in p.ravel().tolist())
            total += contrib if z0 == z1 else 2 * contrib
    return total


def k222_count(g: Triad) -> int:
    """Number of ordered octahedron tuples of the triad's triangle tensor."""
    return _k222_total(triangle_tensor(g))


def _k222_link_total(t3: np.ndarray, a0: int, b0: int, c0: int) -> int:
    ti = t3.astype(np.int64)
    rc = ti[a0, b0, :]
    rb = ti[a0, :, c0]
    m0 = ti[a0, :, :]
    ra = ti[:, b0, c0]
    ma = ti[:, b0, :]
    mb = ti[:, :, c0]
    return int(np.einsum("c,b,bc,a,ac,ab,abc->", rc, rb, m0, ra, ma, mb, ti))


def k222_link(g: Triad, u: int, v: int, w: int) -> int:
    """Ordered completions (u1,v1,w1) of a fixed triangle corner."""
    vi, vj, vs = g.parts
    try:
        a0, b0, c0 = vi.index(u), vj.index(v), vs.index(w)
    except ValueError:
        raise ValueError(f"corner ({u},{v},{w}) does not lie in the parts") from None
    t3 = triangle_tensor(g)
    if not t3[a0, b0, c0]:
        raise ValueError(f"corner ({u},{v},{w}) is not a triangle of the triad")
    return _k222_link_total(t3, a0, b0, c0)


# ---------------------------------------------------------------------------
# verified inequalities


@dataclass
class CountingLemmaResult:
    lhs: Fraction
    rhs_approx: float
    eps: Fraction
    ok: bool


def counting_lemma_check(g: Triad, d: Fraction) -> CountingLemmaResult:
    """| |triangles| - d^3 |A||B||C| |  <=  4 eps^(1/4) |A||B||C|, with eps the
    largest of the three pairs' certified dev2 parameters at density d."""
    d = Fraction(d)
    eps = max(dev2_from_matrix(m).min_eps(d) for m in g.matrices())
    n1, n2, n3 = (len(p) for p in g.parts)
    nprod = n1 * n2 * n3
    lhs = abs(Fraction(triangle_count(g)) - d**3 * nprod)
    ok = lhs**4 <= 256 * eps * Fraction(nprod) ** 4
    _, hi = root_bracket(eps, 4, 64)
    return CountingLemmaResult(lhs=lhs, rhs_approx=float(4 * hi * nprod),
                               eps=eps, ok=ok)


@dataclass
class SymmetryScanResult:
    kind: str               # low_density | high_density | left_witness |
    #                         right_witness | none_found
    density: Fraction
    witness: tuple = ()


def symmetry_scan(b: BipartiteGraph, eps: Fraction) -> SymmetryScanResult:
    """Either the density is within 2*sqrt(eps) of {0,1}, or one side has an
    eps-fraction of vertices with degree fraction strictly inside (eps, 1-eps)."""
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise ValueError("eps must lie in (0, 1/4)")
    mat = b.matrix()
    nu, nw = mat.shape
    if nu == 0 or nw == 0:
        raise EmptySideError("symmetry_scan requires nonempty sides")
    dens = b.density
    if dens**2 <= 4 * eps:
        return SymmetryScanResult(kind="low_density", density=dens)
    if (1 - dens) ** 2 <= 4 * eps:
        return SymmetryScanResult(kind="high_density", density=dens)
    ldeg = mat.sum(axis=1)
    lw = [b.left[u] for u in range(nu) if eps < Fraction(int(ldeg[u]), nw) < 1 - eps]
    if len(lw) >= eps * nu:
        return SymmetryScanResult(kind="left_witness", density=dens, witness=tuple(lw))
    rdeg = mat.sum(axis=0)
    rw = [b.right[w] for w in range(nw) if eps < Fraction(int(rdeg[w]), nu) < 1 - eps]
    if len(rw) >= eps * nw:
        return SymmetryScanResult(kind="right_witness", density=dens, witness=tuple(rw))
    return SymmetryScanResult(kind="none_found", density=dens)


@dataclass
class UnionDev2Result:
    eps1: Fraction
    eps2: Fraction
    union_density: Fraction
    union_normalized: Fraction
    ok: bool


def union_dev2_check(b1: BipartiteGraph, b2: BipartiteGraph) -> UnionDev2Result:
    """Disjoint union keeps quasirandomness: the union's certified parameter
    is at most eps1^(1/4) + eps2^(1/4) at density d1 + d2."""
    if not b1.same_sides(b2):
        raise ValueError("graphs must share identical sides")
    if b1.edges & b2.edges:
        raise ValueError("edge sets must be disjoint")
    r1 = dev2(b1)
    r2 = dev2(b2)
    eps1 = r1.min_eps()  # at own density, so the density term vanishes
    eps2 = r2.min_eps()
    union = BipartiteGraph(b1.left, b1.right, b1.edges | b2.edges)
    ru = dev2(union)
    target_d = r1.density + r2.density
    diff = abs(ru.density - target_d)
    # diff == 0 exactly (disjoint union on identical sides); comparisons are
    # closed at the eps=0 boundary so degenerate complete/empty unions pass
    ok = le_root_sum(diff, [eps1, eps2], 4) and le_root_sum(ru.normalized, [eps1, eps2], 4)
    return UnionDev2Result(eps1=eps1, eps2=eps2, union_density=ru.density,
                           union_normalized=ru.normalized, ok=ok)


@dataclass
class HomRandomResult:
    d3: Fraction
    raw_sum: Fraction
    bound: Fraction
    ok: bool
    delta_bound_ok: bool
    i1_count: int
    i1_bound: Fraction
    i1_ok: bool


def hom_implies_random_check(h: Hypergraph3, g: Triad, eps: Fraction,
                             delta: Fraction, d2: Fraction) -> HomRandomResult:
    """Near-empty relative density plus quasirandom pair graphs forces the
    eight-fold sum below 6*eps*d2^12*(|V1||V2||V3|)^2.

    Preconditions (raised on violation): every pair graph has dev2(delta, d2),
    part sizes are delta-relatively balanced, and the restricted density is at
    most eps.  The worst-case requirement delta <= (d2/2)^48 is reported, not
    enforced.  For the dense direction pass the complement hypergraph.
    """
    eps = Fraction(eps)
    delta = Fraction(delta)
    d2 = Fraction(d2)
    sizes = [len(p) for p in g.parts]
    for a in sizes:
        for b in sizes:
            if abs(a - b) > delta * a:
                raise ValueError("part sizes are not delta-relatively balanced")
    for m in g.matrices():
        if not has_dev2(dev2_from_matrix(m), delta, d2):
            raise ValueError("a pair graph fails dev2(delta, d2)")
    t = triangle_tensor(g)
    r = t & membership_tensor(h, g)
    kt = int(t.sum())
    ke = int(r.sum())
    if ke > eps * kt:
        raise ValueError("restricted density exceeds eps; pass the complement "
                         "for the dense direction")
    res = dev23(h, g)
    n1, n2, n3 = sizes
    nsq = Fraction((n1 * n2 * n3) ** 2)
    bound = 6 * eps * d2**12 * nsq
    i1 = _k222_total(r)
    d3 = res.d3
    i1_bound = 3 * d3 * d2**12 * nsq
    return HomRandomResult(
        d3=d3, raw_sum=res.raw_sum, bound=bound, ok=res.raw_sum <= bound,
        delta_bound_ok=delta <= (d2 / 2) ** 48,
        i1_count=i1, i1_bound=i1_bound, i1_ok=Fraction(i1) <= i1_bound,
    )
