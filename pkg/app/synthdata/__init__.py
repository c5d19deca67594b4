"""
Synthetic Data Package

Driver and scenario specs, shipping presets, the lagged intelligent-driver
simulator and the stratified train/test split.
"""

from .generator import (
    generate_corpus,
    generate_from_spec,
    generate_sequence,
    idm_acceleration,
    leader_profile,
    regime_path,
    simulate_follower,
    split_dataset
)
from .specs import (
    PRESETS,
    CorpusSpec,
    DriverSpec,
    RegimeParams,
    ScenarioSpec,
    get_available_presets,
    load_corpus_spec,
    preset,
    save_corpus_spec,
    stationary_distribution
)

__all__ = [
    'generate_corpus',
    'generate_from_spec',
    'generate_sequence',
    'idm_acceleration',
    'leader_profile',
    'regime_path',
    'simulate_follower',
    'split_dataset',
    'PRESETS',
    'CorpusSpec',
    'DriverSpec',
    'RegimeParams',
    'ScenarioSpec',
    'get_available_presets',
    'load_corpus_spec',
    'preset',
    'save_corpus_spec',
    'stationary_distribution'
]
