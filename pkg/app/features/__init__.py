"""
Features Package

Hand-crafted feature extraction, frozen standardization, the learnable linear
projection and the per-feature contribution measure.
"""

from .extractor import (
    RawFeatureVector,
    ReactionTimeConfig,
    TTC_CAP,
    extract_feature_matrix,
    extract_features,
    harmonic_mean_ttc,
    lagged_correlations,
    reaction_time
)
from .projection import (
    ProjectionModel,
    Standardizer,
    destandardize,
    feature_contributions,
    fit_standardizer,
    project,
    standardize
)

__all__ = [
    'RawFeatureVector',
    'ReactionTimeConfig',
    'TTC_CAP',
    'extract_feature_matrix',
    'extract_features',
    'harmonic_mean_ttc',
    'lagged_correlations',
    'reaction_time',
    'ProjectionModel',
    'Standardizer',
    'destandardize',
    'feature_contributions',
    'fit_standardizer',
    'project',
    'standardize'
]
