"""
Model Package

Shared Gaussian driver states, per-driver profiles, posterior inference over
drivers, EM estimation, new-driver registration and JSON persistence.
"""

from .em import EMInit, EMResult, em_fit, responsibilities, stack_groups
from .gaussian import (
    REG_COVAR,
    DriverProfile,
    DriverState,
    StatePool,
    log_gaussian_pdf,
    log_mixture_density,
    log_mixture_matrix
)
from .generative import (
    GenerativeModel,
    ModelHyper,
    Posterior,
    combine_log_posteriors,
    infer_multi,
    infer_single,
    log_posterior_matrix,
    posterior_over_drivers,
    window_log_posteriors
)
from .persistence import FORMAT_VERSION, load_model, model_from_document, model_to_document, model_to_json, save_model
from .registration import register_driver, register_profile

__all__ = [
    'EMInit',
    'EMResult',
    'em_fit',
    'responsibilities',
    'stack_groups',
    'REG_COVAR',
    'DriverProfile',
    'DriverState',
    'StatePool',
    'log_gaussian_pdf',
    'log_mixture_density',
    'log_mixture_matrix',
    'GenerativeModel',
    'ModelHyper',
    'Posterior',
    'combine_log_posteriors',
    'infer_multi',
    'infer_single',
    'log_posterior_matrix',
    'posterior_over_drivers',
    'window_log_posteriors',
    'FORMAT_VERSION',
    'load_model',
    'model_from_document',
    'model_to_document',
    'model_to_json',
    'save_model',
    'register_driver',
    'register_profile'
]
