"""Phonetic categories as empirical distributions over discrete speech units.

The pipeline: parse time-aligned corpora and quantizer unit sequences
(corpus), estimate per-category distributions (distribution), measure
within-category variability and pairwise dissimilarity in bits (infotheory),
group categories by Ward clustering (cluster), and relate divergence to
feature-based phonetic distance (phonology, stats). The cli module ties it
together behind subcommands.
"""

from .corpus import (
    PhoneAlignment,
    PhoneMapping,
    PhoneSegment,
    UnitObservationBag,
    UnitSequence,
    accumulate_bags,
    align_frames,
    apply_mapping,
    parse_phn,
)
from .distribution import PhoneticDistribution, estimate, utilization
from .infotheory import (
    DistanceMatrix,
    entropy,
    js_divergence,
    jsd_matrix,
    kl_divergence,
    normalized_entropy,
    surprisal,
)
from .cluster import Dendrogram, cut, to_newick, ward_cluster
from .phonology import (
    ClassTable,
    FeatureTable,
    class_entropy,
    feature_distance_matrix,
    hamming_distance,
)
from .stats import CorrelationResult, correlate_matrices, pearson, top_k_similar

__version__ = "0.1.0"

__all__ = [
    "PhoneAlignment",
    "PhoneMapping",
    "PhoneSegment",
    "UnitObservationBag",
    "UnitSequence",
    "accumulate_bags",
    "align_frames",
    "apply_mapping",
    "parse_phn",
    "PhoneticDistribution",
    "estimate",
    "utilization",
    "DistanceMatrix",
    "entropy",
    "js_divergence",
    "jsd_matrix",
    "kl_divergence",
    "normalized_entropy",
    "surprisal",
    "Dendrogram",
    "cut",
    "to_newick",
    "ward_cluster",
    "ClassTable",
    "FeatureTable",
    "class_entropy",
    "feature_distance_matrix",
    "hamming_distance",
    "CorrelationResult",
    "correlate_matrices",
    "pearson",
    "top_k_similar",
    "__version__",
]
