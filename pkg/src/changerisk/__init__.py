"""Fault-proneness analysis of change requests from revision history.

The package links change requests to the code blocks their revisions
touched, scores artifact kinds on a weighted bipartite graph, groups
correlated kinds, and turns the group fault-proneness degrees into a
three-way classification of each request.
"""

from .correlation import (CorrelatedArtifactSet, CorrelationMatrix,
                          chi_square, contingency_table, correlated_sets,
                          correlation_matrix, dissimilarity_matrix, k_medoids)
from .dfp import (FAULT_CLASSES, HIGHLY_FAULT_PRONE, POSSIBLY_FAULT_PRONE,
                  SAFE, DfpReport, ThresholdBand, classify_request,
                  classify_value, dfp_of_artifact, dfp_of_set, threshold_band)
from .errors import (ChangeRiskError, ConfigError, DataError,
                     DegenerateTableError, ParseError)
from .evaluate import (ConfusionCounts, MetricSet, confusion, f_measure,
                       metrics, precision_alt, split)
from .graph import (BipartiteGraph, HitsState, build_graph, edge_weight,
                    revision_support, run_hits)
from .ingest import (ChangeRequest, CodeBlock, RevisionEvent, code_blocks,
                     link_revisions, parse_change_requests,
                     parse_revision_log)
from .model import FaultPronenessClassifier, ReportScorer
from .synth import SynthConfig, generate
from .taxonomy import (ArtifactKind, ChangeRequestArtifact,
                       ClassificationRuleSet, build_artifacts, classify,
                       default_rules, enumerate_kinds, load_rules)
from .textprep import (DescriptiveTokenSet, descriptive_tokens,
                       load_stop_words, rank_descriptors, remove_stop_words,
                       stem, tokenize)

__version__ = "0.1.0"

__all__ = [
    "ArtifactKind",
    "BipartiteGraph",
    "ChangeRequest",
    "ChangeRequestArtifact",
    "ChangeRiskError",
    "ClassificationRuleSet",
    "CodeBlock",
    "ConfigError",
    "ConfusionCounts",
    "CorrelatedArtifactSet",
    "CorrelationMatrix",
    "DataError",
    "DegenerateTableError",
    "DescriptiveTokenSet",
    "DfpReport",
    "FAULT_CLASSES",
    "FaultPronenessClassifier",
    "HIGHLY_FAULT_PRONE",
    "HitsState",
    "MetricSet",
    "POSSIBLY_FAULT_PRONE",
    "ParseError",
    "ReportScorer",
    "RevisionEvent",
    "SAFE",
    "SynthConfig",
    "ThresholdBand",
    "build_artifacts",
    "build_graph",
    "chi_square",
    "classify",
    "classify_request",
    "classify_value",
    "code_blocks",
    "confusion",
    "contingency_table",
    "correlated_sets",
    "correlation_matrix",
    "default_rules",
    "descriptive_tokens",
    "dfp_of_artifact",
    "dfp_of_set",
    "dissimilarity_matrix",
    "edge_weight",
    "enumerate_kinds",
    "f_measure",
    "generate",
    "k_medoids",
    "link_revisions",
    "load_rules",
    "load_stop_words",
    "metrics",
    "parse_change_requests",
    "parse_revision_log",
    "precision_alt",
    "rank_descriptors",
    "remove_stop_words",
    "revision_support",
    "run_hits",
    "split",
    "stem",
    "threshold_band",
    "tokenize",
    "__version__",
]
