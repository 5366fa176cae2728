"""Decomposition-level analytics: equitability, triad classification,
auxiliary colored graphs, overloaded pair classes, representative-mismatch
triples and homogeneity reports.

The workhorse is a tensor-style counting engine: for every triple of vertex
classes, each cross triple is coded by the part indices of its three pairs
and a single bincount yields the triangle and edge counts of every triad at
once.  Per-part quasirandomness statistics are computed once per pair part
and reused across all containing triads.

Classification offers two regularity modes.  ``exact`` evaluates the
eight-fold deviation sum per triad (feasible at small part sizes);
``sufficient`` certifies regularity from quasirandom pair graphs plus
near-0/1 density (the implication proved in the appendix of the underlying
theory), which is what makes desk-scale runs tractable.  Middle-density
triads are classified as errors either way, with a separate counter for
those whose pair graphs pass.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import Decomposition, EdgeColoredBipartiteGraph, Hypergraph3
from .quasirandomness import Dev2Result, dev2_from_matrix, dev23_regular, has_dev2

LABEL_F0 = "F0"
LABEL_F1 = "F1"
LABEL_FERR = "Ferr"


def canonical_triad_key(pair_parts: dict) -> tuple:
    """Canonical address (x, y, z, a, b, c) with x<y<z from a map
    {frozenset({i, j}): part_index} over three pair classes."""
    classes = sorted({v for fs in pair_parts for v in fs})
    if len(classes) != 3:
        raise ValueError("pair classes must span exactly three vertex classes")
    x, y, z = classes
    return (x, y, z,
            pair_parts[frozenset((x, y))],
            pair_parts[frozenset((x, z))],
            pair_parts[frozenset((y, z))])


# ---------------------------------------------------------------------------
# counting engine


def cross_pair_count(p: Decomposition) -> int:
    sizes = [len(v) for v in p.vertex_parts]
    return sum(sizes[i] * sizes[j] for i in range(len(sizes))
               for j in range(i + 1, len(sizes)))


def cross_triple_count(p: Decomposition) -> int:
    sizes = [len(v) for v in p.vertex_parts]
    t = len(sizes)
    return sum(sizes[i] * sizes[j] * sizes[s]
               for i in range(t) for j in range(i + 1, t) for s in range(j + 1, t))


def triad_tables(h: Hypergraph3, p: Decomposition, threads: int = 1) -> dict:
    """{(i, j, s): (tot, edge)} int64 arrays indexed [alpha, beta, gamma].

    tot counts the cross triples whose pair-part profile is (alpha, beta,
    gamma) -- exactly the triangle count of that triad -- and edge counts
    those that are hypergraph edges.  Requires a validating decomposition.
    """
    arr = h.to_array()
    if arr.size:
        vpart = p.vertex_part_array
        vlocal = p.vertex_local_array
        parts = vpart[arr]
        locs = vlocal[arr]
        cross = ((parts[:, 0] != parts[:, 1]) & (parts[:, 1] != parts[:, 2])
                 & (parts[:, 0] != parts[:, 2]))
        parts = parts[cross]
        locs = locs[cross]
        order = np.argsort(parts, axis=1)
        ps = np.take_along_axis(parts, order, 1)
        ls = np.take_along_axis(locs, order, 1)
        t = p.t
        class_key = (ps[:, 0].astype(np.int64) * t + ps[:, 1]) * t + ps[:, 2]
        sort_idx = np.argsort(class_key, kind="stable")
        class_key = class_key[sort_idx]
        ls = ls[sort_idx]
    else:
        class_key = np.zeros(0, dtype=np.int64)
        ls = np.zeros((0, 3), dtype=np.int64)
    t = p.t

    def one_class(ijs):
        i, j, s = ijs
        a_ij = p.part_matrix(i, j).astype(np.int64)
        a_is = p.part_matrix(i, s).astype(np.int64)
        a_js = p.part_matrix(j, s).astype(np.int64)
        if a_ij.size and a_ij.min() < 0 or a_is.size and a_is.min() < 0 \
                or a_js.size and a_js.min() < 0:
            raise ValueError(f"pair classes of {ijs} do not cover all pairs")
        lij, lis, ljs = p.ell_of(i, j), p.ell_of(i, s), p.ell_of(j, s)
        nbins = lij * lis * ljs
        code = (a_ij[:, :, None] * lis + a_is[:, None, :]) * ljs + a_js[None, :, :]
        tot = np.bincount(code.ravel(), minlength=nbins)
        key = (int(i) * t + j) * t + s
        lo = np.searchsorted(class_key, key, side="left")
        hi = np.searchsorted(class_key, key, side="right")
        block = ls[lo:hi]
        if block.size:
            ecodes = code[block[:, 0], block[:, 1], block[:, 2]]
            edge = np.bincount(ecodes, minlength=nbins)
        else:
            edge = np.zeros(nbins, dtype=np.int64)
        shape = (lij, lis, ljs)
        return ijs, (tot.reshape(shape), edge.reshape(shape))

    classes = p.triple_classes()
    if threads > 1 and len(classes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one_class, classes))
    else:
        results = [one_class(c) for c in classes]
    return dict(results)


# ---------------------------------------------------------------------------
# per-pair-part statistics


@dataclass
class PairStats:
    results: tuple            # Dev2Result per part, original order
    passes: tuple             # has_dev2(eps2, 1/ell) per part
    order: tuple              # relabeling: passing parts first, stable
    ell_ij: int               # number of passing parts


def pair_part_stats(p: Decomposition, eps2: Fraction) -> dict:
    """Per pair class: dev2 of every part at target density 1/ell, plus the
    stable relabeling that lists quasirandom parts first."""
    eps2 = Fraction(eps2)
    out = {}
    for (i, j) in p.pair_classes():
        ell = p.ell_of(i, j)
        target = Fraction(1, ell) if ell else Fraction(0)
        results = []
        passes = []
        for alpha in range(ell):
            r = dev2_from_matrix(p.pair_graph(i, j, alpha).matrix())
            results.append(r)
            passes.append(has_dev2(r, eps2, target))
        order = sorted(range(ell), key=lambda a: (not passes[a], a))
        out[(i, j)] = PairStats(results=tuple(results), passes=tuple(passes),
                                order=tuple(order), ell_ij=sum(passes))
    return out


# ---------------------------------------------------------------------------
# classification


@dataclass
class TriadClassification:
    labels: dict              # canonical address -> F0 | F1 | Ferr
    densities: dict           # canonical address -> Fraction
    counts: dict              # label -> int
    middle_regular: int       # middle-density triads with passing pair graphs
    eps1: Fraction
    eps2: Fraction
    f_val: Fraction
    mode: str
    t: int
    ell: int

    def label(self, key) -> str:
        return self.labels[key]


def classify_triads(h: Hypergraph3, p: Decomposition, eps1: Fraction,
                    eps2: Fraction, f_val: Fraction, mode: str = "sufficient",
                    tables: dict | None = None, threads: int = 1) -> TriadClassification:
    """Label every triad F1 / F0 / Ferr.

    A triad is F1 (F0) when its relative density is at least 1 - f_val (at
    most f_val) and its regularity check passes; everything else, including
    every middle-density triad, is Ferr.  ``sufficient`` mode takes the
    regularity check to be "all three pair graphs pass dev2(eps2, d2)" with
    d2 the mean pair density, which together with extreme density certifies
    the eight-fold bound; ``exact`` mode evaluates the eight-fold sum.
    """
    eps1 = Fraction(eps1)
    eps2 = Fraction(eps2)
    f_val = Fraction(f_val)
    if tables is None:
        tables = triad_tables(h, p, threads=threads)
    pair_cache = {}

    def pair_result(i, j, alpha) -> Dev2Result:
        key = (i, j, alpha)
        if key not in pair_cache:
            pair_cache[key] = dev2_from_matrix(p.pair_graph(i, j, alpha).matrix())
        return pair_cache[key]

    labels = {}
    densities = {}
    counts = {LABEL_F0: 0, LABEL_F1: 0, LABEL_FERR: 0}
    middle_regular = 0
    for (i, j, s), (tot, edge) in sorted(tables.items()):
        lij, lis, ljs = tot.shape
        for a in range(lij):
            r_ij = pair_result(i, j, a)
            for b in range(lis):
                r_is = pair_result(i, s, b)
                for c in range(ljs):
                    r_js = pair_result(j, s, c)
                    key = (i, j, s, a, b, c)
                    kt = int(tot[a, b, c])
                    ke = int(edge[a, b, c])
                    dens = Fraction(ke, kt) if kt else Fraction(0)
                    densities[key] = dens
                    if mode == "sufficient":
                        d2 = (r_ij.density + r_is.density + r_js.density) / 3
                        regular = all(has_dev2(r, eps2, d2)
                                      for r in (r_ij, r_is, r_js))
                    elif mode == "exact":
                        regular, _, _ = dev23_regular(
                            h, p.triad(i, j, s, a, b, c), eps1, eps2)
                    else:
                        raise ValueError(f"unknown classification mode {mode!r}")
                    extreme_hi = dens >= 1 - f_val
                    extreme_lo = dens <= f_val
                    if regular and extreme_hi:
                        lab = LABEL_F1
                    elif regular and extreme_lo:
                        lab = LABEL_F0
                    else:
                        lab = LABEL_FERR
                        if regular and not extreme_hi and not extreme_lo:
                            middle_regular += 1
                    labels[key] = lab
                    counts[lab] += 1
    return TriadClassification(labels=labels, densities=densities, counts=counts,
                               middle_regular=middle_regular, eps1=eps1, eps2=eps2,
                               f_val=f_val, mode=mode, t=p.t, ell=p.ell)


# ---------------------------------------------------------------------------
# overloaded pair classes


def bad_pairs(classification: TriadClassification, threshold_coeff: Fraction):
    """(bad, counts): pair classes whose count of error triads reaches
    threshold_coeff * ell^3 * t."""
    coeff = Fraction(threshold_coeff)
    counts: dict = {}
    for (i, j, s, _a, _b, _c), lab in classification.labels.items():
        if lab != LABEL_FERR:
            continue
        for pair in ((i, j), (i, s), (j, s)):
            counts[pair] = counts.get(pair, 0) + 1
    threshold = coeff * classification.ell**3 * classification.t
    bad = {pair for pair, cnt in counts.items() if Fraction(cnt) >= threshold}
    return bad, counts


# ---------------------------------------------------------------------------
# auxiliary edge-colored graphs

_LABEL_COLOR = {LABEL_F0: 0, LABEL_F1: 1, LABEL_FERR: 2}


@dataclass
class AuxGraph:
    pair: tuple               # (i, j)
    left_parts: tuple         # quasirandom part indices of (i, j), relabeled order
    right_corners: tuple      # (s, beta, gamma) with both corner parts quasirandom
    graph: EdgeColoredBipartiteGraph
    ell_ij: int


def build_aux_graph(p: Decomposition, classification: TriadClassification,
                    pair: tuple, stats: dict | None = None) -> AuxGraph:
    """Edge-colored graph of one pair class against its corner pairs.

    Left vertices are the quasirandom parts of the class; right vertices are
    pairs of quasirandom parts toward every third class; the color of a
    cross pair is the classification label of the corresponding triad.
    """
    if stats is None:
        stats = pair_part_stats(p, classification.eps2)
    i, j = pair
    if not (0 <= i < j < p.t):
        raise ValueError(f"bad pair class {pair}")
    st = stats[(i, j)]
    left = [st.order[pos] for pos in range(st.ell_ij)]
    if not left:
        raise ValueError(f"pair class {pair} has no quasirandom parts")
    corners = []
    for s in range(p.t):
        if s in (i, j):
            continue
        st_is = stats[tuple(sorted((i, s)))]
        st_js = stats[tuple(sorted((j, s)))]
        for bpos in range(st_is.ell_ij):
            beta = st_is.order[bpos]
            for cpos in range(st_js.ell_ij):
                gamma = st_js.order[cpos]
                corners.append((s, beta, gamma))
    colors = np.zeros((len(left), len(corners)), dtype=np.int8)
    for li, alpha in enumerate(left):
        for ci, (s, beta, gamma) in enumerate(corners):
            key = canonical_triad_key({
                frozenset((i, j)): alpha,
                frozenset((min(i, s), max(i, s))): beta,
                frozenset((min(j, s), max(j, s))): gamma,
            })
            colors[li, ci] = _LABEL_COLOR[classification.labels[key]]
    g = EdgeColoredBipartiteGraph(tuple(left), tuple(corners), colors)
    return AuxGraph(pair=(i, j), left_parts=tuple(left),
                    right_corners=tuple(corners), graph=g, ell_ij=st.ell_ij)


def global_aux_view(p: Decomposition, classification: TriadClassification,
                    stats: dict | None = None) -> EdgeColoredBipartiteGraph:
    """Single colored graph over all quasirandom parts vs all corner pairs.

    Non-incident (part, corner) combinations carry color 2; the per-pair
    graphs from :func:`build_aux_graph` are the faithful objects, this view
    is a convenience for global inspection.
    """
    if stats is None:
        stats = pair_part_stats(p, classification.eps2)
    lefts = []
    for (i, j) in p.pair_classes():
        st = stats[(i, j)]
        lefts.extend(((i, j), st.order[pos]) for pos in range(st.ell_ij))
    corners = []
    for (i, j) in p.pair_classes():
        st = stats[(i, j)]
        for s in range(p.t):
            if s in (i, j):
                continue
            st_is = stats[tuple(sorted((i, s)))]
            st_js = stats[tuple(sorted((j, s)))]
            for bpos in range(st_is.ell_ij):
                for cpos in range(st_js.ell_ij):
                    corners.append(((i, j), s, st_is.order[bpos], st_js.order[cpos]))
    corners = sorted(set(corners))
    colors = np.full((len(lefts), len(corners)), 2, dtype=np.int8)
    for li, ((i, j), alpha) in enumerate(lefts):
        for ci, ((ci_i, ci_j), s, beta, gamma) in enumerate(corners):
            if (ci_i, ci_j) != (i, j):
                continue
            key = canonical_triad_key({
                frozenset((i, j)): alpha,
                frozenset((min(i, s), max(i, s))): beta,
                frozenset((min(j, s), max(j, s))): gamma,
            })
            colors[li, ci] = _LABEL_COLOR[classification.labels[key]]
    return EdgeColoredBipartiteGraph(tuple(lefts), tuple(corners), colors)


# ---------------------------------------------------------------------------
# part-triple coloring and representative-mismatch triples


def part_triple_coloring(classification: TriadClassification,
                         p: Decomposition) -> dict:
    """{(i, j, s): int8 array [alpha, beta, gamma]} of triad colors."""
    out = {}
    for (i, j, s) in p.triple_classes():
        arr = np.zeros((p.ell_of(i, j), p.ell_of(i, s), p.ell_of(j, s)),
                       dtype=np.int8)
        out[(i, j, s)] = arr
    for (i, j, s, a, b, c), lab in classification.labels.items():
        out[(i, j, s)][a, b, c] = _LABEL_COLOR[lab]
    return out


@dataclass
class UnstableTriples:
    masks: dict               # (i, j, s) -> bool array [alpha, beta, gamma]
    count: int

    def as_set(self) -> set:
        out = set()
        for ijs, mask in self.masks.items():
            for abc in zip(*np.nonzero(mask)):
                out.add((ijs, tuple(int(x) for x in abc)))
        return out


def unstable_triples(coloring: dict, clusters: dict, representatives: dict,
                     triple_classes=None) -> UnstableTriples:
    """Part triples whose color changes when any single coordinate is
    replaced by its cluster representative.

    ``clusters[(i, j)]`` maps a part index to its representative slot and
    ``representatives[(i, j)]`` lists the representative part indices.
    Coordinates without a cluster assignment (exceptions, unclustered parts)
    never trigger.
    """
    masks = {}
    total = 0
    keys = triple_classes if triple_classes is not None else sorted(coloring)
    for ijs in keys:
        col = coloring[ijs]
        i, j, s = ijs
        mask = np.zeros(col.shape, dtype=bool)
        for axis, pair in enumerate(((i, j), (i, s), (j, s))):
            cl = clusters.get(pair)
            reps = representatives.get(pair)
            if cl is None or reps is None:
                continue
            nparts = col.shape[axis]
            repmap = np.arange(nparts)
            has_rep = np.zeros(nparts, dtype=bool)
            for alpha, slot in cl.items():
                if alpha < nparts:
                    repmap[alpha] = reps[slot]
                    has_rep[alpha] = True
            swapped = np.take(col, repmap, axis=axis)
            differs = swapped != col
            sel = [slice(None)] * 3
            valid = has_rep.reshape([-1 if ax == axis else 1 for ax in range(3)])
            mask |= differs & valid
        masks[ijs] = mask
        total += int(mask.sum())
    return UnstableTriples(masks=masks, count=total)


# ---------------------------------------------------------------------------
# reports


@dataclass
class EquitabilityReport:
    is_equipartition: bool
    part_size_range: tuple
    covered_pair_fraction: Fraction        # of all vertex pairs (C(n,2))
    covered_pair_fraction_cross: Fraction  # of cross pairs only
    predicate: bool
    eps1: Fraction
    eps2: Fraction
    per_pair: dict = field(default_factory=dict)


def equitability_check(p: Decomposition, eps1: Fraction, eps2: Fraction,
                       stats: dict | None = None) -> EquitabilityReport:
    """Equipartition plus the covered-pair predicate: at least a (1 - eps1)
    fraction of all vertex pairs lie in a pair part passing dev2(eps2, 1/ell)."""
    eps1 = Fraction(eps1)
    eps2 = Fraction(eps2)
    sizes = [len(v) for v in p.vertex_parts]
    is_eq = (max(sizes) - min(sizes) <= 1) if sizes else True
    if stats is None:
        stats = pair_part_stats(p, eps2)
    covered = 0
    per_pair = {}
    for (i, j), st in stats.items():
        part_sizes = [len(p.pair_parts[(i, j)][a]) for a in range(len(st.passes))]
        got = sum(sz for sz, ok in zip(part_sizes, st.passes) if ok)
        covered += got
        per_pair[(i, j)] = {"ell_ij": st.ell_ij, "covered": got,
                            "total": sum(part_sizes)}
    total_pairs = p.n * (p.n - 1) // 2
    cross = cross_pair_count(p)
    frac_abs = Fraction(covered, total_pairs) if total_pairs else Fraction(1)
    frac_cross = Fraction(covered, cross) if cross else Fraction(1)
    return EquitabilityReport(
        is_equipartition=is_eq,
        part_size_range=(min(sizes) if sizes else 0, max(sizes) if sizes else 0),
        covered_pair_fraction=frac_abs,
        covered_pair_fraction_cross=frac_cross,
        predicate=is_eq and frac_abs >= 1 - eps1,
        eps1=eps1, eps2=eps2, per_pair=per_pair,
    )


@dataclass
class HomogeneityReport:
    mu: Fraction
    good_triple_fraction: Fraction           # of cross triples
    good_triple_fraction_absolute: Fraction  # of C(n,3)
    regular_triple_fraction: Fraction | None
    regular_mode: str
    cross_triples: int
    total_triples: int
    table: list = field(default_factory=list)


def homogeneity_report(h: Hypergraph3, p: Decomposition, mu: Fraction,
                       eps1: Fraction, eps2: Fraction,
                       regularity: str = "sufficient",
                       tables: dict | None = None,
                       include_table: bool = True) -> HomogeneityReport:
    """Triple-weighted homogeneity and regularity fractions.

    A triad is mu-homogeneous when its relative density is at most mu or at
    least 1 - mu; the good fraction weights triads by their triangle counts.
    Regularity per triad is certified per ``regularity``: "exact" evaluates
    the eight-fold sum at (eps1, eps2), "sufficient" uses quasirandom pair
    graphs plus density outside (mu, 1-mu), "skip" omits it.
    """
    mu = Fraction(mu)
    eps1 = Fraction(eps1)
    eps2 = Fraction(eps2)
    if tables is None:
        tables = triad_tables(h, p)
    pair_cache = {}

    def pair_result(i, j, alpha):
        key = (i, j, alpha)
        if key not in pair_cache:
            pair_cache[key] = dev2_from_matrix(p.pair_graph(i, j, alpha).matrix())
        return pair_cache[key]

    good_mass = 0
    regular_mass = 0
    cross = 0
    table = []
    for (i, j, s), (tot, edge) in sorted(tables.items()):
        lij, lis, ljs = tot.shape
        for a in range(lij):
            for b in range(lis):
                for c in range(ljs):
                    kt = int(tot[a, b, c])
                    cross += kt
                    if kt == 0:
                        continue
                    dens = Fraction(int(edge[a, b, c]), kt)
                    homog = dens <= mu or dens >= 1 - mu
                    if homog:
                        good_mass += kt
                    regularap = None
                    if regularity == "exact":
                        regular, _, _ = dev23_regular(
                            h, p.triad(i, j, s, a, b, c), eps1, eps2)
                        regularap = regular
                    elif regularity == "sufficient":
                        rs = (pair_result(i, j, a), pair_result(i, s, b),
                              pair_result(j, s, c))
                        d2 = sum((r.density for r in rs), Fraction(0)) / 3
                        regularap = (homog and
                                     all(has_dev2(r, eps2, d2) for r in rs))
                    elif regularity != "skip":
                        raise ValueError(f"unknown regularity mode {regularity!r}")
                    if regularap:
                        regular_mass += kt
                    if include_table:
                        table.append({"address": (i, j, s, a, b, c),
                                      "triangles": kt,
                                      "density": dens,
                                      "homogeneous": homog,
                                      "regular": regularap})
    n = p.n
    total = n * (n - 1) * (n - 2) // 6
    good_frac = Fraction(good_mass, cross) if cross else Fraction(1)
    # off-class triples (inside at most two classes) count against the
    # absolute fraction, as does nothing else
    good_abs = Fraction(good_mass, total) if total else Fraction(1)
    reg_frac = None
    if regularity != "skip":
        reg_frac = Fraction(regular_mass, cross) if cross else Fraction(1)
    return HomogeneityReport(
        mu=mu, good_triple_fraction=good_frac,
        good_triple_fraction_absolute=good_abs,
        regular_triple_fraction=reg_frac,
        regular_mode=regularity,
        cross_triples=cross, total_triples=total,
        table=table,
    )
