"""Spanning-tree embedding in random graphs via expansion, exact-length path
weaving and absorption."""

from .absorption import (Absorber, AbsorbingStructure, FlexTemplate, ReversiblePath, StructureConfig, absorb,
                         build_absorber, build_absorbing_structure, build_directed_absorber, build_flex_template,
                         build_reversible_path, resilient_match, validate_absorber, validate_structure)
from .cover import CoverConfig, cover_problems, cover_with_paths, cover_with_paths_directed
from .embed import (EmbedConfig, Embedding, StarDemand, attach_stars, embed_forest, embed_rooted,
                    embed_rooted_directed, validate_embedding)
from .errors import *  # noqa: F401,F403
from .expansion import ExpansionReport, check_expander, check_expands_into, split_target, verify_random_expansion
from .graph import DiGraph, Graph, gen_digraph, gen_gnp, gen_tournament, induced, read_edge_list, write_edge_list
from .matching import generalized_matching
from .paths import (PathRequest, WeaveConfig, connect_pairs_exact, connect_pairs_exact_directed, find_exact_path,
                    path_problems)
from .pipeline import ScaleParams, TrialRecord, embed_spanning_tree, revealed_host, threshold_scan, verify_embedding
from .rng import RngSeed, make_rng
from .trees import (Forest, TreeShape, bare_paths, classify, gen_random_tree, leaves, read_tree, reconstruct, strip,
                    write_tree)

__version__ = "0.1.0"
