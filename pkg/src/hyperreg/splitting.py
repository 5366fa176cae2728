"""Quasirandom edge splitting and merging.

Splitting is realized by independent seeded assignment of each edge to a
part (plus a remainder part when the hit probability does not divide one),
followed by exact verification that every part keeps quasirandomness within
the fourth-root degradation of the input and density within a relative
tolerance; failed verifications trigger resampling from a fresh substream
up to a bounded number of attempts.  The returned result always carries the
achieved statistics and a met/unmet flag rather than raising.

Merging is the inverse: the disjoint union of parts on identical sides,
with the certified parameter of the union checked against the sum of the
parts' fourth roots (asserted for two parts, reported for more).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import BipartiteGraph
from .exactmath import le_root, le_root_sum
from .generators import substream
from .quasirandomness import Dev2Result, dev2

_TAG_SPLIT = 20


@dataclass
class SplitResult:
    parts: list                    # BipartiteGraph per part, 1..ell
    remainder: BipartiteGraph      # possibly empty part 0
    target_density: Fraction       # rho * p
    achieved: list                 # Dev2Result per part
    part_ok: list                  # per-part verification flags
    remainder_ok: bool
    met: bool
    attempts: int
    degenerate: bool = False
    input_eps: Fraction = Fraction(0)
    feasibility_ok: bool | None = None

    @property
    def num_parts(self) -> int:
        return len(self.parts)


def _assign_edges(edges: list, num_parts: int, p_float: float, integer_case: bool,
                  rng: np.random.Generator) -> list:
    """Part index per edge: 1..num_parts, or 0 for the remainder."""
    m = len(edges)
    if integer_case:
        return (rng.integers(0, num_parts, size=m) + 1).tolist()
    u = rng.random(m)
    idx = np.floor(u / p_float).astype(np.int64) + 1
    idx[idx > num_parts] = 0
    return idx.tolist()


def split_by_probability(b: BipartiteGraph, p: Fraction, delta: Fraction,
                         seed: int, max_attempts: int = 5) -> SplitResult:
    """Partition the edge set into floor(1/p) parts hit with probability p
    each, plus a remainder.

    Each part must satisfy the fourth-root degradation of the input's
    measured deviation (when the input deviation is 0, a part passes with
    normalized sum at most delta) and have density rho*p*(1 +- delta); the
    remainder must satisfy |E_0| <= rho*p*(1+delta)*m^2 with m the smaller
    side.  If 1/p is an integer the remainder is empty by construction.
    """
    p = Fraction(p)
    delta = Fraction(delta)
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    num_parts = int(Fraction(1) / p)  # floor
    integer_case = (Fraction(1) / p).denominator == 1
    rho = b.density
    target = rho * p
    edges = sorted(b.edges)
    if not edges:
        empty = [BipartiteGraph(b.left, b.right, ()) for _ in range(num_parts)]
        return SplitResult(parts=empty,
                           remainder=BipartiteGraph(b.left, b.right, ()),
                           target_density=target,
                           achieved=[dev2(g) if g.left and g.right else None
                                     for g in empty],
                           part_ok=[True] * num_parts, remainder_ok=True,
                           met=True, attempts=0, degenerate=True)
    input_res = dev2(b)
    input_eps = input_res.normalized
    m_side = min(len(b.left), len(b.right))
    # feasibility premise eps >= 10 (1/(ell*m))^(1/5), reported not enforced
    feas = input_eps**5 >= Fraction(10**5, num_parts * m_side) if input_eps > 0 else False

    best = None
    for attempt in range(1, int(max_attempts) + 1):
        rng = substream(seed, _TAG_SPLIT, attempt)
        assignment = _assign_edges(edges, num_parts, float(p), integer_case, rng)
        buckets = [[] for _ in range(num_parts + 1)]
        for e, k in zip(edges, assignment):
            buckets[k].append(e)
        parts = [BipartiteGraph(b.left, b.right, buckets[k])
                 for k in range(1, num_parts + 1)]
        remainder = BipartiteGraph(b.left, b.right, buckets[0])
        achieved = [dev2(g) for g in parts]
        part_ok = []
        for res in achieved:
            dens_ok = abs(res.density - target) <= delta * target
            if input_eps == 0:
                dev_ok = res.normalized <= delta
            else:
                dev_ok = le_root(res.normalized, input_eps, 4)
            part_ok.append(dens_ok and dev_ok)
        rem_ok = Fraction(len(remainder.edges)) <= target * (1 + delta) * m_side**2
        met = all(part_ok) and rem_ok
        cand = SplitResult(parts=parts, remainder=remainder, target_density=target,
                           achieved=achieved, part_ok=part_ok, remainder_ok=rem_ok,
                           met=met, attempts=attempt, input_eps=input_eps,
                           feasibility_ok=feas)
        if met:
            return cand
        if best is None or sum(part_ok) > sum(best.part_ok):
            best = cand
    best.attempts = int(max_attempts)
    return best


def split_quasirandom(b: BipartiteGraph, num_parts: int, delta: Fraction,
                      seed: int, max_attempts: int = 5) -> SplitResult:
    """Uniform split into num_parts quasirandom parts (integer case: the
    remainder is empty by construction)."""
    if num_parts < 1:
        raise ValueError("num_parts must be at least 1")
    return split_by_probability(b, Fraction(1, int(num_parts)), delta, seed,
                                max_attempts=max_attempts)


@dataclass
class MergeResult:
    graph: BipartiteGraph
    result: Dev2Result
    part_eps: list
    bound_ok: bool | None      # asserted for two parts, reported beyond
    bound_checked: bool


def merge_parts(parts: list) -> MergeResult:
    """Disjoint union of parts on identical sides.

    For two parts the union's certified deviation must stay below the sum of
    the parts' fourth roots (closed comparison at the 0 boundary); for more
    parts the iterated bound is reported without being asserted.
    """
    if not parts:
        raise ValueError("need at least one part")
    first = parts[0]
    edges = set()
    for g in parts:
        if not g.same_sides(first):
            raise ValueError("parts must share identical sides")
        if edges & g.edges:
            raise ValueError("parts must be pairwise edge-disjoint")
        edges |= g.edges
    union = BipartiteGraph(first.left, first.right, edges)
    res = dev2(union)
    part_eps = [dev2(g).normalized for g in parts]
    if len(parts) == 1:
        return MergeResult(graph=union, result=res, part_eps=part_eps,
                           bound_ok=True, bound_checked=True)
    target_d = sum((g.density for g in parts), Fraction(0))
    diff = abs(res.density - target_d)
    ok = (le_root_sum(diff, part_eps, 4)
          and le_root_sum(res.normalized, part_eps, 4))
    return MergeResult(graph=union, result=res, part_eps=part_eps,
                       bound_ok=ok, bound_checked=len(parts) == 2)
