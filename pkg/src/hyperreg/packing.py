"""Greedy separated-family extraction and neighborhood clustering.

In an edge-colored bipartite graph, left vertices with heavy color-2
neighborhoods are set aside as exceptions; the rest are clustered around
greedily chosen representatives whose color-1 neighborhoods are pairwise
separated.  Each clustered vertex is assigned to the first representative
within half the similarity radius, and the full three-color similarity is
verified after construction rather than assumed (violations indicate the
quantitative hypotheses failed and are reported as diagnostics).

All thresholds compare integer set sizes against rational bounds exactly;
square roots are handled by squaring both sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import EdgeColoredBipartiteGraph
from .vc import SetSystem, find_e0e1_uk_copy


def delta_separated_greedy(system: SetSystem, delta_abs: int) -> list[int]:
    """Indices of a maximal subfamily with pairwise symmetric difference
    strictly above delta_abs, scanning in input order."""
    if delta_abs < 0:
        raise ValueError("delta_abs must be nonnegative")
    masks = system.masks()
    chosen: list[int] = []
    for i, m in enumerate(masks):
        if all((m ^ masks[j]).bit_count() > delta_abs for j in chosen):
            chosen.append(i)
    return chosen


@dataclass
class PackingResult:
    exceptions: tuple
    representatives: tuple
    clusters: dict
    m: int
    delta: Fraction
    eps: Fraction
    violations: list = field(default_factory=list)

    def cluster_members(self) -> dict:
        """representative index -> list of assigned left vertices."""
        out: dict[int, list] = {i: [] for i in range(self.m)}
        for v, i in self.clusters.items():
            out[i].append(v)
        return out


def _color_neighborhoods(g: EdgeColoredBipartiteGraph):
    return tuple((g.colors == u) for u in (0, 1, 2))


def packing_cluster(g: EdgeColoredBipartiteGraph, delta: Fraction,
                    eps: Fraction) -> PackingResult:
    """Exception set, representatives and similarity assignment.

    exceptions: left vertices whose color-2 degree is at least sqrt(eps)|B|
    (decided by squared comparison).  Representatives are chosen greedily in
    input order from the rest so their color-1 neighborhoods are pairwise
    more than delta|B|/2 apart; every remaining vertex is assigned to the
    first representative within delta|B|/2.  The full similarity condition
    (all three colors within delta|B|) is then verified; failures are
    recorded but do not raise.
    """
    delta = Fraction(delta)
    eps = Fraction(eps)
    if not (0 < delta < 1 and 0 < eps < 1):
        raise ValueError("delta and eps must lie in (0, 1)")
    n0, n1c, n2c = _color_neighborhoods(g)
    na = len(g.left)
    nb = len(g.right)
    deg2 = n2c.sum(axis=1)
    # |N2(a)| >= sqrt(eps)|B|  <=>  |N2(a)|^2 >= eps |B|^2
    exceptions = [a for a in range(na)
                  if Fraction(int(deg2[a])) ** 2 >= eps * nb * nb]
    exc_set = set(exceptions)
    candidates = [a for a in range(na) if a not in exc_set]

    half_num = delta.numerator * nb       # dist <= delta|B|/2  <=>  2 q dist <= num
    half_den = 2 * delta.denominator
    reps: list[int] = []
    for a in candidates:
        if not reps:
            reps.append(a)
            continue
        dists = (n1c[a][None, :] != n1c[reps]).sum(axis=1)
        if all(half_den * int(dv) > half_num for dv in dists):
            reps.append(a)

    clusters: dict = {}
    violations = []
    full_num = delta.numerator * nb       # dist <= delta|B|  <=>  q dist <= num
    full_den = delta.denominator
    for a in candidates:
        assigned = None
        for i, x in enumerate(reps):
            dist1 = int((n1c[a] != n1c[x]).sum())
            if half_den * dist1 <= half_num:
                assigned = i
                break
        if assigned is None:
            # cannot happen: a greedy scan keeps any vertex beyond the radius
            violations.append(("unassigned", g.left[a], None))
            continue
        clusters[g.left[a]] = assigned
        x = reps[assigned]
        for u, nc in ((0, n0), (1, n1c), (2, n2c)):
            dist = int((nc[a] != nc[x]).sum())
            if full_den * dist > full_num:
                violations.append(("similarity", g.left[a],
                                   (u, dist, g.left[x])))
    return PackingResult(
        exceptions=tuple(g.left[a] for a in exceptions),
        representatives=tuple(g.left[a] for a in reps),
        clusters=clusters,
        m=len(reps),
        delta=delta,
        eps=eps,
        violations=violations,
    )


@dataclass
class PackingVerification:
    exception_bound_ok: bool
    e2_mass_ok: bool
    separation_ok: bool
    assignment_ok: bool
    no_uk_copy: bool | None
    m: int

    @property
    def ok(self) -> bool:
        return (self.exception_bound_ok and self.separation_ok
                and self.assignment_ok)


def verify_packing_bound(g: EdgeColoredBipartiteGraph, result: PackingResult,
                         k: int | None = None) -> PackingVerification:
    """Recount the construction's guarantees.

    Checks |exceptions| <= sqrt(eps)|A| and |E2| <= eps|A||B| (squared /
    direct comparisons), representative separation, and assignment radius.
    When k is given, the absence of a 0/1-copy of U(k) is established via
    exhaustive search, in which case the representative count should not
    scale with |A| (the quantitative constant is not explicit, so only the
    qualitative expectation is recorded).
    """
    n0, n1c, n2c = _color_neighborhoods(g)
    na, nb = g.colors.shape
    eps = result.eps
    delta = result.delta
    exception_bound_ok = Fraction(len(result.exceptions)) ** 2 <= eps * na * na
    e2_mass_ok = Fraction(int(n2c.sum())) <= eps * na * nb
    lidx = {v: i for i, v in enumerate(g.left)}
    rep_rows = [lidx[x] for x in result.representatives]
    separation_ok = True
    for i in range(len(rep_rows)):
        for j in range(i + 1, len(rep_rows)):
            dist = int((n1c[rep_rows[i]] != n1c[rep_rows[j]]).sum())
            if 2 * delta.denominator * dist <= delta.numerator * nb:
                separation_ok = False
    assignment_ok = True
    for v, i in result.clusters.items():
        dist = int((n1c[lidx[v]] != n1c[rep_rows[i]]).sum())
        if 2 * delta.denominator * dist > delta.numerator * nb:
            assignment_ok = False
    no_uk = None
    if k is not None:
        no_uk = find_e0e1_uk_copy(g, k) is None
    return PackingVerification(
        exception_bound_ok=exception_bound_ok,
        e2_mass_ok=e2_mass_ok,
        separation_ok=separation_ok,
        assignment_ok=assignment_ok,
        no_uk_copy=no_uk,
        m=result.m,
    )
