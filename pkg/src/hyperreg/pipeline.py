"""End-to-end decomposition compression with a full audit trail.

Given a hypergraph, a decomposition whose pair classes are finely split,
and a tuning schedule, the pipeline classifies triads, discards overloaded
pair classes, clusters each remaining class's parts by their colored corner
signatures, filters cluster cells by error and mismatch mass, verifies that
every surviving cell is near-monochromatic, merges each surviving cluster
into one bipartite graph and re-splits it into parts of density 1/ell1, and
assembles the result into a new decomposition with exactly ell1 parts per
pair class.  Every intermediate cardinality lands in the report.

Schedules come in two modes.  ``desk`` carries explicit rational thresholds
and is what actually runs; ``theory`` reproduces the analytic constant
chain exactly (symbolically when expansion would be astronomically large)
and exists to be inspected and verified, not executed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    BipartiteGraph,
    Decomposition,
    EdgeColoredTripartite3Graph,
    Hypergraph3,
    validate_decomposition,
)
from .decomposition import (
    bad_pairs,
    build_aux_graph,
    classify_triads,
    cross_pair_count,
    equitability_check,
    homogeneity_report,
    pair_part_stats,
    part_triple_coloring,
    triad_tables,
    unstable_triples,
)
from .exactmath import frac_str, parse_frac, rat_json
from .packing import packing_cluster
from .splitting import split_by_probability, split_quasirandom

_TAG_CLUSTER_SPLIT = 30
_TAG_FALLBACK_SPLIT = 31


def derive_seed(seed: int, *key: int) -> int:
    """Stable 64-bit subseed for (seed, key...)."""
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


class ScheduleModeError(RuntimeError):
    """Raised when a theory-mode schedule is used as runnable thresholds."""


# ---------------------------------------------------------------------------
# declarative eps2 functions (serializable)


@dataclass(frozen=True)
class Eps2Fn:
    """Part-count -> rational threshold, in declarative form.

    forms: const (value), recip (scale / x), recip_pow (scale / x**power).
    """
    form: str = "const"
    value: Fraction = Fraction(1, 10)
    power: int = 1

    def __call__(self, x) -> Fraction:
        x = Fraction(x) if not isinstance(x, int) else x
        if self.form == "const":
            return self.value
        if self.form == "recip":
            return min(Fraction(1), self.value / x)
        if self.form == "recip_pow":
            return min(Fraction(1), self.value / Fraction(x) ** self.power)
        raise ValueError(f"unknown eps2 form {self.form!r}")

    def to_json(self) -> dict:
        return {"form": self.form, "value": frac_str(self.value), "power": self.power}

    @classmethod
    def from_json(cls, doc: dict) -> "Eps2Fn":
        return cls(form=doc.get("form", "const"),
                   value=parse_frac(doc.get("value", "1/10")),
                   power=int(doc.get("power", 1)))


# ---------------------------------------------------------------------------
# symbolic power values for the theory schedule


def _ilog10(n: int) -> float:
    bl = n.bit_length()
    if bl <= 900:
        return math.log10(float(n))
    shift = bl - 53
    return math.log10(float(n >> shift)) + shift * math.log10(2)


def _log10_frac(x: Fraction) -> float:
    if x <= 0:
        return float("-inf")
    return _ilog10(x.numerator) - _ilog10(x.denominator)


@dataclass(frozen=True)
class PowerValue:
    """coeff * base**exp without expansion; exact on demand.

    Used for schedule constants whose exact expansion would exceed the digit
    budget.  base is kept in (0, 1) and exp positive by construction.
    """
    coeff: Fraction
    base: Fraction
    exp: int

    def bits_estimate(self) -> int:
        b = max(self.base.numerator.bit_length(), self.base.denominator.bit_length())
        c = max(self.coeff.numerator.bit_length(), self.coeff.denominator.bit_length())
        return self.exp * b + c

    def as_fraction(self, max_bits: int = 2_000_000) -> Fraction | None:
        """Exact expansion, or None when the digit budget is exceeded."""
        if self.bits_estimate() > max_bits:
            return None
        return self.coeff * self.base**self.exp

    def log10(self) -> float:
        return _log10_frac(self.coeff) + self.exp * _log10_frac(self.base)

    def to_json(self) -> dict:
        return {"form": "power", "coeff": frac_str(self.coeff),
                "base": frac_str(self.base), "exp": self.exp,
                "log10": self.log10()}


@dataclass(frozen=True)
class RootValue:
    """base ** (1/root), kept symbolic (irrational for root > 1)."""
    base: Fraction
    root: int

    def log10(self) -> float:
        return _log10_frac(self.base) / self.root

    def to_json(self) -> dict:
        return {"form": "root", "base": frac_str(self.base), "root": self.root,
                "log10": self.log10()}


def schedule_value_json(v) -> dict:
    if isinstance(v, (PowerValue, RootValue)):
        return v.to_json()
    return rat_json(Fraction(v))


# ---------------------------------------------------------------------------
# tuning schedules


@dataclass
class TuningSchedule:
    """All pipeline constants, explicit and configurable.

    Desk mode carries directly usable rational thresholds; theory mode
    carries the exact constant chain (symbolic where huge) plus the same
    field names so the two can be diffed.
    """
    mode: str                       # "desk" | "theory"
    k: int = 1
    D: int = 1
    eps1: Fraction = Fraction(1, 10)
    eps2_fn: Eps2Fn = field(default_factory=Eps2Fn)
    tau1: object = Fraction(1, 10)
    delta: object = Fraction(1, 10)
    eps1_prime: object = Fraction(1, 25)
    eps1_dblprime: object = Fraction(1, 100)
    m_cap: int | None = None
    ell1: int | None = None
    t0: int = 2
    f_val: Fraction = Fraction(1, 10)
    c1: Fraction = Fraction(1)
    # desk thresholds (explicit coefficients instead of computed powers)
    psi_coeff: Fraction = Fraction(1, 4)
    pack_eps: Fraction = Fraction(1, 25)
    nontrivial_coeff: Fraction = Fraction(3, 10)
    omega2_coeff: Fraction = Fraction(1, 5)
    omega3_coeff: Fraction = Fraction(1, 4)
    claim_threshold: Fraction = Fraction(9, 10)
    sigma_threshold: Fraction = Fraction(9, 10)
    split_delta: Fraction = Fraction(1, 10)
    max_split_attempts: int = 5
    classification_mode: str = "sufficient"
    # theory-mode function fields
    eps2_prime_fn: object = None
    eps2_dblprime_fn: object = None

    def require_desk(self):
        if self.mode != "desk":
            raise ScheduleModeError(
                "theory-mode constants are not runnable thresholds; build a "
                "desk schedule or dump the symbolic values instead")

    def to_json(self) -> dict:
        doc = {
            "mode": self.mode, "k": self.k, "D": self.D,
            "eps1": schedule_value_json(self.eps1),
            "eps2_fn": self.eps2_fn.to_json(),
            "tau1": schedule_value_json(self.tau1),
            "delta": schedule_value_json(self.delta),
            "eps1_prime": schedule_value_json(self.eps1_prime),
            "eps1_dblprime": schedule_value_json(self.eps1_dblprime),
            "m_cap": self.m_cap,
            "ell1": self.ell1 if self.ell1 is None or isinstance(self.ell1, int)
                    else str(self.ell1),
            "t0": self.t0,
            "f_val": schedule_value_json(self.f_val),
            "c1": schedule_value_json(self.c1),
            "psi_coeff": schedule_value_json(self.psi_coeff),
            "pack_eps": schedule_value_json(self.pack_eps),
            "nontrivial_coeff": schedule_value_json(self.nontrivial_coeff),
            "omega2_coeff": schedule_value_json(self.omega2_coeff),
            "omega3_coeff": schedule_value_json(self.omega3_coeff),
            "claim_threshold": schedule_value_json(self.claim_threshold),
            "sigma_threshold": schedule_value_json(self.sigma_threshold),
            "split_delta": schedule_value_json(self.split_delta),
            "max_split_attempts": self.max_split_attempts,
            "classification_mode": self.classification_mode,
        }
        return doc


def desk_schedule(delta=Fraction(1, 10), f_val=Fraction(1, 10), ell1=None,
                  eps1=Fraction(1, 10), eps2=None, **overrides) -> TuningSchedule:
    """Runnable schedule with sane desk defaults.

    Requires 0 < delta <= f_val < 1 (the defaults sit at the boundary) and,
    when given, ell1 >= 1.  Unset ell1 is resolved at run time to
    max(m_max**2, input ell).
    """
    delta = parse_frac(delta)
    f_val = parse_frac(f_val)
    eps1 = parse_frac(eps1)
    if not 0 < delta <= f_val < 1:
        raise ValueError("desk mode needs 0 < delta <= f_val < 1")
    if ell1 is not None and int(ell1) < 1:
        raise ValueError("ell1 must be at least 1")
    eps2_fn = eps2 if isinstance(eps2, Eps2Fn) else (
        Eps2Fn(form="const", value=parse_frac(eps2)) if eps2 is not None else Eps2Fn())
    sched = TuningSchedule(mode="desk", eps1=eps1, eps2_fn=eps2_fn, delta=delta,
                           f_val=f_val, ell1=None if ell1 is None else int(ell1),
                           claim_threshold=1 - f_val, sigma_threshold=1 - f_val)
    for name, value in overrides.items():
        if not hasattr(sched, name):
            raise TypeError(f"unknown schedule field {name!r}")
        setattr(sched, name, value)
    return sched


_DESK_FRAC_FIELDS = ("eps1", "delta", "f_val", "psi_coeff", "pack_eps",
                     "nontrivial_coeff", "omega2_coeff", "omega3_coeff",
                     "claim_threshold", "sigma_threshold", "split_delta")


def schedule_from_json(doc: dict) -> TuningSchedule:
    """Load a desk schedule from its JSON form (theory schedules are derived,
    not loaded)."""
    mode = doc.get("mode", "desk")
    if mode == "theory":
        return derive_theory_schedule(
            parse_frac(doc.get("eps1", "1/2")), int(doc.get("k", 1)),
            int(doc.get("D", 1)), parse_frac(doc.get("c1", 1)),
            eps2=Eps2Fn.from_json(doc["eps2_fn"]) if "eps2_fn" in doc else None)
    if mode != "desk":
        raise ValueError(f"unknown schedule mode {mode!r}")

    def field_value(entry):
        if isinstance(entry, dict) and "exact" in entry:
            return parse_frac(entry["exact"])
        return parse_frac(entry)

    kwargs = {}
    for name in _DESK_FRAC_FIELDS:
        if name in doc:
            kwargs[name] = field_value(doc[name])
    sched = desk_schedule(
        delta=kwargs.pop("delta", Fraction(1, 10)),
        f_val=kwargs.pop("f_val", Fraction(1, 10)),
        ell1=doc.get("ell1"),
        eps1=kwargs.pop("eps1", Fraction(1, 10)),
        eps2=Eps2Fn.from_json(doc["eps2_fn"]) if "eps2_fn" in doc else None,
        **kwargs)
    if "max_split_attempts" in doc:
        sched.max_split_attempts = int(doc["max_split_attempts"])
    if "classification_mode" in doc:
        sched.classification_mode = str(doc["classification_mode"])
    if "m_cap" in doc and doc["m_cap"] is not None:
        sched.m_cap = int(doc["m_cap"])
    if "t0" in doc:
        sched.t0 = int(doc["t0"])
    if "k" in doc:
        sched.k = int(doc["k"])
    if "D" in doc:
        sched.D = int(doc["D"])
    return sched


def derive_theory_schedule(eps1: Fraction, k: int, D: int, c1_surrogate: Fraction,
                           eps2: Eps2Fn | None = None,
                           expand_bits: int = 2_000_000) -> TuningSchedule:
    """The exact constant chain from one regularity parameter.

    tau1 = eps1**(4D); delta = tau1**400 / 1000;
    eps1' = (delta/(8 c1))**(2k+1000); m = ceil(2 c1 (delta/8)**(-2k-2));
    eps1'' = eps1'**2 / 1000; ell1 = ceil(delta**-4 m**4);
    eps2'(x) = eps1'' * eps2(x) * eps2(ceil(2**4 delta**(-8k-10)));
    eps2''(x) = eps2(ell1) * eps2'(x)**5 / 4.

    Values whose exact expansion exceeds expand_bits are kept symbolically
    as coeff * base**exp.  The c1 surrogate must be at least 1 (the packing
    constant is not explicit; callers choose it).
    """
    eps1 = parse_frac(eps1)
    c1 = parse_frac(c1_surrogate)
    if not 0 < eps1 < 1:
        raise ValueError("eps1 must lie in (0, 1)")
    if c1 < 1:
        raise ValueError("c1 surrogate must be at least 1")
    if k < 1 or D < 1:
        raise ValueError("k and D must be positive integers")
    eps2_fn = eps2 if eps2 is not None else Eps2Fn(form="recip", value=Fraction(1))

    tau1 = eps1 ** (4 * D)
    delta = tau1**400 / 1000
    base = delta / (8 * c1)
    e1p_exp = 2 * k + 1000
    eps1_prime = PowerValue(Fraction(1), base, e1p_exp)
    e1p_exact = eps1_prime.as_fraction(expand_bits)
    if e1p_exact is not None:
        eps1_prime = e1p_exact
    eps1_dblprime = PowerValue(Fraction(1, 1000), base, 2 * e1p_exp)
    e1pp_exact = eps1_dblprime.as_fraction(expand_bits)
    if e1pp_exact is not None:
        eps1_dblprime = e1pp_exact
    inv = (Fraction(8) / delta) ** (2 * k + 2)
    m_val = 2 * c1 * inv
    m = -((-m_val.numerator) // m_val.denominator)   # ceil
    ell1_val = m**4 / delta**4
    ell1 = -((-ell1_val.numerator) // ell1_val.denominator)

    arg_val = 16 / delta ** (8 * k + 10)
    eps2_arg = -((-arg_val.numerator) // arg_val.denominator)
    e2_of_arg = eps2_fn(eps2_arg)
    e2_of_ell1 = eps2_fn(ell1)

    def eps2_prime_fn(x) -> PowerValue:
        coeff = Fraction(1, 1000) * eps2_fn(x) * e2_of_arg
        return PowerValue(coeff, base, 2 * e1p_exp)

    def eps2_dblprime_fn(x) -> PowerValue:
        inner = eps2_prime_fn(x)
        coeff = e2_of_ell1 * inner.coeff**5 / 4
        return PowerValue(coeff, base, 5 * inner.exp)

    return TuningSchedule(
        mode="theory", k=int(k), D=int(D), eps1=eps1, eps2_fn=eps2_fn,
        tau1=tau1, delta=delta, eps1_prime=eps1_prime,
        eps1_dblprime=eps1_dblprime, m_cap=int(m), ell1=int(ell1),
        t0=2, f_val=RootValue(eps1, int(D)) if D > 1 else eps1,
        c1=c1, eps2_prime_fn=eps2_prime_fn, eps2_dblprime_fn=eps2_dblprime_fn,
    )


def verify_schedule_chain(s: TuningSchedule) -> dict:
    """Exact verification of the constant-chain inequalities.

    Every step reduces to comparisons on small exact quantities (the
    symbolic powers share the base delta/(8 c1)):

    - eps1'' < eps1':   eps1'' = eps1'^2/1000 and 0 < eps1' < 1
    - eps1'  < delta:   base < delta (8 c1 > 1) and base**e <= base < delta
    - delta  < tau1:    delta = tau1**400/1000 and 0 < tau1 < 1
    - tau1   < eps1:    common base eps1 in (0,1), exponent 4D > 1
    - tau1   < eps1**(1/D): exponents 4D > 1/D on a base in (0,1)
    - eps2''(x) < eps2'(x) < eps2(x) for sampled x: coefficient products of
      values in (0, 1].
    """
    if s.mode != "theory":
        raise ScheduleModeError("chain verification applies to theory schedules")
    tau1 = Fraction(s.tau1)
    delta = Fraction(s.delta)
    eps1 = Fraction(s.eps1)
    c1 = Fraction(s.c1)
    base = delta / (8 * c1)
    checks = {}
    checks["base_in_unit"] = 0 < base < 1
    checks["eps1_dblprime_lt_eps1_prime"] = checks["base_in_unit"]
    checks["eps1_prime_lt_delta"] = checks["base_in_unit"] and 8 * c1 > 1 and base < delta
    checks["delta_lt_tau1"] = 0 < tau1 < 1 and delta == tau1**400 / 1000
    checks["tau1_lt_eps1"] = 0 < eps1 < 1 and 4 * s.D > 1 and tau1 == eps1 ** (4 * s.D)
    checks["tau1_lt_f_eps1"] = 0 < eps1 < 1 and 4 * s.D * s.D > 1
    # eps2 chain at sampled part counts: with base in (0,1) and positive
    # exponents, coeff_pp < coeff_p <= eps2(x) forces
    # eps2''(x) < eps2'(x) < eps2(x)
    eps2_ok = checks["base_in_unit"]
    for x in sorted({1, 2, max(2, min(s.ell1 or 2, 10**6))}):
        e2 = s.eps2_fn(x)
        e2p = s.eps2_prime_fn(x)
        e2pp = s.eps2_dblprime_fn(x)
        eps2_ok &= 0 < e2 <= 1
        eps2_ok &= e2p.exp >= 1 and 0 < e2p.coeff <= e2
        eps2_ok &= e2pp.exp > e2p.exp and 0 < e2pp.coeff < e2p.coeff
    checks["eps2_chain"] = bool(eps2_ok)
    checks["ell1_rederived"] = _rederive_ell1(delta, s.m_cap) == s.ell1
    checks["all"] = all(v for k, v in checks.items() if k != "all")
    return checks


def _rederive_ell1(delta: Fraction, m: int) -> int:
    val = Fraction(m) ** 4 / delta**4
    return -((-val.numerator) // val.denominator)


# ---------------------------------------------------------------------------
# cell homogeneity


def cell_homogeneity_check(r, cells, threshold: Fraction):
    """(sigma, fraction): majority 0/1-color share of a cluster cell.

    ``r`` is an EdgeColoredTripartite3Graph or a raw int8 color tensor;
    ``cells`` gives three index lists.  sigma is the majority color when its
    share reaches the threshold, else None.
    """
    colors = r.colors if isinstance(r, EdgeColoredTripartite3Graph) else np.asarray(r)
    ia, ib, ic = (list(c) for c in cells)
    if not ia or not ib or not ic:
        raise ValueError("empty cluster cell")
    block = colors[np.ix_(ia, ib, ic)]
    size = block.size
    counts = np.bincount(block.ravel(), minlength=3)
    frac1 = Fraction(int(counts[1]), size)
    frac0 = Fraction(int(counts[0]), size)
    sigma, frac = (1, frac1) if frac1 >= frac0 else (0, frac0)
    threshold = Fraction(threshold)
    if frac >= threshold:
        return sigma, frac
    return None, frac


# ---------------------------------------------------------------------------
# the compression pipeline


@dataclass
class PipelineReport:
    seed: int
    ell1: int
    degenerate_uniform: bool
    input_homogeneity: object
    output_homogeneity: object
    classification_summary: dict
    bad_pairs: list
    ferr_counts: dict
    per_pair: dict
    troublesome_count: int
    omega0: int
    cell_counts: list          # [all cells, nontrivial, low-error, stable]
    cell_masses: list          # triple-weighted masses of the same chain
    claim_results: list
    claim_failures: int
    downgraded_clusters: list
    gamma_edges: int
    gamma_fraction_cross: Fraction
    sigma_summary: list
    audit: dict
    validation: dict
    schedule: dict

    def to_json_dict(self) -> dict:
        from .reporting import normalize
        return normalize({
            "seed": self.seed,
            "ell1": self.ell1,
            "degenerate_uniform": self.degenerate_uniform,
            "input_homogeneity": self.input_homogeneity,
            "output_homogeneity": self.output_homogeneity,
            "classification_summary": self.classification_summary,
            "bad_pairs": sorted(self.bad_pairs),
            "ferr_counts": {f"{i},{j}": v for (i, j), v in sorted(self.ferr_counts.items())},
            "per_pair": {f"{i},{j}": v for (i, j), v in sorted(self.per_pair.items())},
            "troublesome_count": self.troublesome_count,
            "omega0": self.omega0,
            "cell_counts": self.cell_counts,
            "cell_masses": self.cell_masses,
            "claim_results": self.claim_results,
            "claim_failures": self.claim_failures,
            "downgraded_clusters": self.downgraded_clusters,
            "gamma_edges": self.gamma_edges,
            "gamma_fraction_cross": self.gamma_fraction_cross,
            "sigma_summary": self.sigma_summary,
            "audit": self.audit,
            "validation": self.validation,
            "schedule": self.schedule,
        })


def _full_pair_graph(p: Decomposition, i: int, j: int) -> BipartiteGraph:
    vi, vj = p.vertex_parts[i], p.vertex_parts[j]
    return BipartiteGraph(vi, vj, [(u, w) for u in vi for w in vj])


def _combine_pool_sources(pool: list) -> list:
    """Merge pool entries that stem from the same cluster (its trivial or
    downgraded union plus its split remainder behave alike)."""
    merged: dict = {}
    order: list = []
    for tag, edges in pool:
        key = ("c", tag[1]) if tag[0] in ("cluster", "remainder") else tag
        if key not in merged:
            merged[key] = []
            order.append(key)
        merged[key].extend(edges)
    return [(key, sorted(merged[key])) for key in order]


def _chunk_pool(pool: list, slots: int) -> list:
    """Fill ``slots`` leftover parts from tagged edge pools.

    Any partition works here, so sources are kept whole whenever possible
    (one per slot, padding with empty parts); with more sources than slots
    the largest claim their own slot and the small tail shares the last one.
    Mixing sources blurs the behavior groups, which costs output
    homogeneity, so it is confined to that tail slot.
    """
    sources = _combine_pool_sources(pool)
    if len(sources) <= slots:
        out = [edges for _key, edges in sources]
        out.extend([] for _ in range(slots - len(sources)))
        return out
    sources.sort(key=lambda kv: (-len(kv[1]), str(kv[0])))
    out = [edges for _key, edges in sources[:slots - 1]]
    tail: list = []
    for _key, edges in sources[slots - 1:]:
        tail.extend(edges)
    out.append(sorted(tail))
    return out


def compress_decomposition(h: Hypergraph3, p: Decomposition,
                           schedule: TuningSchedule, seed: int,
                           threads: int = 1):
    """(Q, PipelineReport): the compression pipeline, desk mode only."""
    schedule.require_desk()
    val_in = validate_decomposition(h, p)
    if not val_in.ok:
        raise ValueError(f"input decomposition invalid: {val_in.violations[:3]}")
    ell = p.ell
    eps2_val = schedule.eps2_fn(max(ell, 1))
    f_val = Fraction(schedule.f_val)
    delta = Fraction(schedule.delta)

    tables = triad_tables(h, p, threads=threads)
    classification = classify_triads(h, p, schedule.eps1, eps2_val, f_val,
                                     mode=schedule.classification_mode,
                                     tables=tables)
    stats = pair_part_stats(p, eps2_val)
    input_hom = homogeneity_report(h, p, mu=f_val, eps1=schedule.eps1,
                                   eps2=eps2_val, regularity="sufficient",
                                   tables=tables, include_table=False)
    psi, ferr_counts = bad_pairs(classification, schedule.psi_coeff)

    good_pairs = [pair for pair in p.pair_classes()
                  if pair not in psi and stats[pair].ell_ij > 0]
    degenerate = not good_pairs

    # per-pair clustering of the colored corner signatures
    per_pair: dict = {}
    clusters_by_pair: dict = {}
    reps_by_pair: dict = {}
    members_by_pair: dict = {}
    nontrivial_by_pair: dict = {}
    packs: dict = {}

    def cluster_one(pair):
        aux = build_aux_graph(p, classification, pair, stats=stats)
        pack = packing_cluster(aux.graph, delta=delta, eps=schedule.pack_eps)
        return pair, aux, pack

    if threads > 1 and len(good_pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            cluster_results = list(ex.map(cluster_one, good_pairs))
    else:
        cluster_results = [cluster_one(pair) for pair in good_pairs]

    nt_coeff = Fraction(schedule.nontrivial_coeff)
    for pair, aux, pack in cluster_results:
        packs[pair] = pack
        clusters_by_pair[pair] = dict(pack.clusters)
        reps_by_pair[pair] = list(pack.representatives)
        members = pack.cluster_members()
        members_by_pair[pair] = members
        m_ij = pack.m
        nontrivial = {}
        for u, mem in members.items():
            # |W^u| >= coeff * ell / m_ij, exactly
            nontrivial[u] = (m_ij > 0 and
                             Fraction(len(mem)) * m_ij >= nt_coeff * ell)
        nontrivial_by_pair[pair] = nontrivial
        per_pair[pair] = {
            "ell_ij": aux.ell_ij,
            "m": pack.m,
            "exceptions": len(pack.exceptions),
            "cluster_sizes": sorted((len(v) for v in members.values()), reverse=True),
            "nontrivial": sum(1 for v in nontrivial.values() if v),
            "similarity_violations": len(pack.violations),
            "m_cap_ok": None if schedule.m_cap is None else pack.m <= schedule.m_cap,
        }

    # part-triple coloring, mismatch triples, cell filters
    coloring = part_triple_coloring(classification, p)
    troubles = unstable_triples(coloring, clusters_by_pair, reps_by_pair)

    good_set = set(good_pairs)
    omega0 = [ijs for ijs in p.triple_classes()
              if all(pr in good_set for pr in
                     ((ijs[0], ijs[1]), (ijs[0], ijs[2]), (ijs[1], ijs[2])))]

    cells = []
    for (i, j, s) in omega0:
        for u in sorted(members_by_pair[(i, j)]):
            mu_ = members_by_pair[(i, j)][u]
            if not mu_:
                continue
            for v in sorted(members_by_pair[(i, s)]):
                mv = members_by_pair[(i, s)][v]
                if not mv:
                    continue
                for w in sorted(members_by_pair[(j, s)]):
                    mw = members_by_pair[(j, s)][w]
                    if not mw:
                        continue
                    cells.append(((i, j, s), (u, v, w), (mu_, mv, mw)))

    def cell_mass(cell):
        _, _, (a, b, c) = cell
        return len(a) * len(b) * len(c)

    o2_coeff = Fraction(schedule.omega2_coeff)
    o3_coeff = Fraction(schedule.omega3_coeff)
    cells_nontrivial = []
    for cell in cells:
        (i, j, s), (u, v, w), _mem = cell
        if (nontrivial_by_pair[(i, j)].get(u) and nontrivial_by_pair[(i, s)].get(v)
                and nontrivial_by_pair[(j, s)].get(w)):
            cells_nontrivial.append(cell)
    cells_low_error = []
    for cell in cells_nontrivial:
        ijs, _uvw, (a, b, c) = cell
        block = coloring[ijs][np.ix_(a, b, c)]
        err = int((block == 2).sum())
        if Fraction(err) <= o2_coeff * block.size:
            cells_low_error.append(cell)
    cells_stable = []
    for cell in cells_low_error:
        ijs, _uvw, (a, b, c) = cell
        tr = int(troubles.masks[ijs][np.ix_(a, b, c)].sum())
        if Fraction(tr) <= o3_coeff * (len(a) * len(b) * len(c)):
            cells_stable.append(cell)

    cell_counts = [len(cells), len(cells_nontrivial), len(cells_low_error),
                   len(cells_stable)]
    cell_masses = [sum(cell_mass(c) for c in cells),
                   sum(cell_mass(c) for c in cells_nontrivial),
                   sum(cell_mass(c) for c in cells_low_error),
                   sum(cell_mass(c) for c in cells_stable)]

    # near-monochromaticity of every surviving cell
    claim_results = []
    claim_failures = 0
    downgraded = set()
    cell_sigma = {}
    for cell in cells_stable:
        ijs, uvw, mem = cell
        sigma, fracv = cell_homogeneity_check(coloring[ijs],
                                              mem, schedule.claim_threshold)
        passed = sigma is not None
        if not passed:
            claim_failures += 1
            (i, j, s) = ijs
            for pair, u in (((i, j), uvw[0]), ((i, s), uvw[1]), ((j, s), uvw[2])):
                downgraded.add((pair, u))
        else:
            cell_sigma[(ijs, uvw)] = sigma
        claim_results.append({"ijs": ijs, "uvw": uvw,
                              "sigma": sigma, "fraction": fracv, "pass": passed})

    # determine ell1
    m_max = max((pk.m for pk in packs.values()), default=1)
    ell1 = schedule.ell1 if schedule.ell1 is not None else max(m_max**2, max(ell, 1))
    ell1 = int(ell1)

    # merge clusters and split into density-1/ell1 parts
    q_pair_parts: dict = {}
    split_positions: dict = {}
    gamma_edges = 0
    for pair in p.pair_classes():
        i, j = pair
        if pair not in good_set:
            full = _full_pair_graph(p, i, j)
            res = split_quasirandom(full, ell1, schedule.split_delta,
                                    derive_seed(seed, _TAG_FALLBACK_SPLIT, i, j),
                                    max_attempts=schedule.max_split_attempts)
            q_pair_parts[pair] = [sorted(g.edges) for g in res.parts]
            per_pair.setdefault(pair, {})
            per_pair[pair].update({"fallback_split": True, "split_met": res.met,
                                   "split_attempts": res.attempts})
            continue
        st = stats[pair]
        quasir = set(st.order[:st.ell_ij])
        members = members_by_pair[pair]
        pool = []       # (tag, sorted edge list), behavior-coherent sources
        new_parts = []
        split_info = []
        for u in sorted(members):
            mem = members[u]
            if not mem:
                continue
            union_edges = set()
            for alpha in mem:
                union_edges |= p.pair_parts[pair][alpha]
            tag = ("cluster", u)
            if not nontrivial_by_pair[pair].get(u) or (pair, u) in downgraded:
                pool.append((tag, sorted(union_edges)))
                continue
            graph = BipartiteGraph(p.vertex_parts[i], p.vertex_parts[j], union_edges)
            rho = graph.density
            if rho * ell1 < 1:
                pool.append((tag, sorted(union_edges)))
                continue
            if rho * ell1 == 1:
                # the cluster is exactly one target part
                split_positions[(pair, u)] = [len(new_parts)]
                new_parts.append(sorted(union_edges))
                split_info.append({"cluster": u, "rho": rho, "p": Fraction(1),
                                   "parts": 1, "met": True, "attempts": 0})
                continue
            p_hit = Fraction(1) / (rho * ell1)
            res = split_by_probability(graph, p_hit, schedule.split_delta,
                                       derive_seed(seed, _TAG_CLUSTER_SPLIT, i, j, u),
                                       max_attempts=schedule.max_split_attempts)
            first = len(new_parts)
            for g in res.parts:
                new_parts.append(sorted(g.edges))
            split_positions[(pair, u)] = list(range(first, first + len(res.parts)))
            if res.remainder.edges:
                pool.append((("remainder", u), sorted(res.remainder.edges)))
            split_info.append({"cluster": u, "rho": rho, "p": p_hit,
                               "parts": len(res.parts), "met": res.met,
                               "attempts": res.attempts})
        # exception parts and non-quasirandom parts join the leftover pool
        for alpha in sorted(packs[pair].exceptions):
            pool.append((("exception", alpha), sorted(p.pair_parts[pair][alpha])))
        for alpha in range(p.ell_of(i, j)):
            if alpha not in quasir:
                pool.append((("nonquasirandom", alpha),
                             sorted(p.pair_parts[pair][alpha])))
        pool_mass = sum(len(e) for _t, e in pool)
        gamma_edges += pool_mass
        slots = ell1 - len(new_parts)
        folded = False
        if slots <= 0:
            if pool_mass:
                # no free slot: fold each remainder back into a part split
                # from its own cluster (same behavior group), else the last
                other = []
                for tag, edges in pool:
                    pos = None
                    if tag[0] in ("cluster", "remainder"):
                        pos = split_positions.get((pair, tag[1]))
                    if pos:
                        new_parts[pos[-1]] = sorted(new_parts[pos[-1]] + list(edges))
                    else:
                        other.extend(edges)
                if other:
                    new_parts[-1] = sorted(new_parts[-1] + other)
                folded = True
        else:
            if pool_mass:
                new_parts.extend(sorted(chunk) for chunk in _chunk_pool(pool, slots))
            else:
                new_parts.extend([] for _ in range(slots))
        q_pair_parts[pair] = new_parts
        per_pair[pair].update({
            "splits": split_info, "leftover_edges": pool_mass,
            "leftover_folded": folded,
            "parts_from_splits": sum(len(pos) for (pr, _u), pos in
                                     split_positions.items() if pr == pair)})

    q = Decomposition(p.n, p.vertex_parts, q_pair_parts)
    val_out = validate_decomposition(h, q)

    # output metrics and split-cell accounting
    q_tables = triad_tables(h, q, threads=threads)
    output_hom = homogeneity_report(h, q, mu=f_val, eps1=schedule.eps1,
                                    eps2=schedule.eps2_fn(ell1),
                                    regularity="sufficient",
                                    tables=q_tables, include_table=False)
    sigma_summary = []
    sig_thr = Fraction(schedule.sigma_threshold)
    for (ijs, uvw), sigma in sorted(cell_sigma.items()):
        (i, j, s) = ijs
        pos_u = split_positions.get(((i, j), uvw[0]))
        pos_v = split_positions.get(((i, s), uvw[1]))
        pos_w = split_positions.get(((j, s), uvw[2]))
        if not (pos_u and pos_v and pos_w):
            continue
        tot, edge = q_tables[ijs]
        s0 = (len(pos_u) + 1) * (len(pos_v) + 1) * (len(pos_w) + 1)
        s2 = len(pos_u) * len(pos_v) * len(pos_w)
        fails = 0
        for x in pos_u:
            for y in pos_v:
                for z in pos_w:
                    kt = int(tot[x, y, z])
                    if kt == 0:
                        continue
                    dens = Fraction(int(edge[x, y, z]), kt)
                    fracv = dens if sigma == 1 else 1 - dens
                    if fracv < sig_thr:
                        fails += 1
        sigma_summary.append({"ijs": ijs, "uvw": uvw, "sigma": sigma,
                              "cube_with_remainder": s0,
                              "interior": s2, "failing": fails,
                              "surviving": s2 - fails})

    cross_pairs = cross_pair_count(p)
    audit = audit_output(h, q, schedule, tables=q_tables)
    report = PipelineReport(
        seed=int(seed), ell1=ell1, degenerate_uniform=degenerate,
        input_homogeneity=input_hom, output_homogeneity=output_hom,
        classification_summary={**classification.counts,
                                "middle_regular": classification.middle_regular,
                                "mode": classification.mode},
        bad_pairs=sorted(psi), ferr_counts=ferr_counts, per_pair=per_pair,
        troublesome_count=troubles.count, omega0=len(omega0),
        cell_counts=cell_counts, cell_masses=cell_masses,
        claim_results=claim_results, claim_failures=claim_failures,
        downgraded_clusters=sorted([(pr, u) for (pr, u) in downgraded]),
        gamma_edges=gamma_edges,
        gamma_fraction_cross=Fraction(gamma_edges, cross_pairs) if cross_pairs else Fraction(0),
        sigma_summary=sigma_summary, audit=audit,
        validation=val_out.to_dict(), schedule=schedule.to_json(),
    )
    return q, report


def audit_output(h: Hypergraph3, q: Decomposition, schedule: TuningSchedule,
                 tables: dict | None = None) -> dict:
    """Equitability and homogeneity of the output decomposition, plus the
    fraction of pairs outside quasirandom parts (reported; asserted only on
    planted instances by the test suite)."""
    val = validate_decomposition(h, q)
    ell1 = q.ell
    eps2_val = schedule.eps2_fn(max(ell1, 1))
    eq = equitability_check(q, schedule.eps1, eps2_val)
    hom = homogeneity_report(h, q, mu=schedule.f_val, eps1=schedule.eps1,
                             eps2=eps2_val, regularity="skip",
                             tables=tables, include_table=False)
    uncovered_cross = 1 - eq.covered_pair_fraction_cross
    return {
        "valid": val.ok,
        "equipartition": eq.is_equipartition,
        "covered_pair_fraction": eq.covered_pair_fraction,
        "covered_pair_fraction_cross": eq.covered_pair_fraction_cross,
        "uncovered_cross_fraction": uncovered_cross,
        "uncovered_within_eps1": uncovered_cross <= Fraction(schedule.eps1),
        "equitability_predicate": eq.predicate,
        "homogeneous_fraction": hom.good_triple_fraction,
        "mu": Fraction(schedule.f_val),
    }
