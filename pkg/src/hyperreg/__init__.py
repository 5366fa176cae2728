"""Quasirandomness statistics, clustering, quasirandom splitting and the
decomposition-compression pipeline for 3-uniform hypergraphs."""

from .core import (
    BipartiteGraph,
    Decomposition,
    EdgeColoredBipartiteGraph,
    EdgeColoredTripartite3Graph,
    EmptySideError,
    Hypergraph3,
    OversizeError,
    ParseError,
    Triad,
    ValidationReport,
    parse_decomposition,
    parse_hypergraph,
    serialize_decomposition,
    serialize_hypergraph,
    validate_decomposition,
)
from .decomposition import (
    HomogeneityReport,
    TriadClassification,
    bad_pairs,
    build_aux_graph,
    classify_triads,
    equitability_check,
    homogeneity_report,
    pair_part_stats,
    triad_tables,
    unstable_triples,
)
from .generators import (
    PlantedInstance,
    gen_clustered_colored,
    gen_ip2_hypergraph,
    gen_planted_decomposition,
    gen_random_bipartite,
    gen_random_triad,
    two_level_profile,
)
from .packing import PackingResult, delta_separated_greedy, packing_cluster, verify_packing_bound
from .pipeline import (
    Eps2Fn,
    TuningSchedule,
    cell_homogeneity_check,
    compress_decomposition,
    derive_theory_schedule,
    desk_schedule,
    verify_schedule_chain,
)
from .quasirandomness import (
    Dev2Result,
    Dev23Result,
    Disc2Result,
    check_equivalence,
    counting_lemma_check,
    dev2,
    dev23,
    disc2,
    has_dev2,
    has_dev23,
    hom_implies_random_check,
    k222_count,
    k222_link,
    min_dev2_eps,
    symmetry_scan,
    triangle_count,
    triangle_set,
    union_dev2_check,
)
from .splitting import MergeResult, SplitResult, merge_parts, split_by_probability, split_quasirandom
from .vc import SetSystem, UkGraph, Vc2Result, build_uk, find_e0e1_uk_copy, vc2_dim, vc_dim

__version__ = "0.1.0"
