"""
New-Driver Registration

Estimates a profile for a driver the model has never seen, using only that
driver's data: EM with the state pool and projection frozen and only the new
driver's weights free. Nothing already in the model is modified; a new
GenerativeModel sharing the same state pool is returned.
"""

import logging
from typing import Sequence, Union

import numpy as np

from app.core.errors import DuplicateDriverError, ValidationError
from app.domain.sequence import CarFollowingSequence
from app.model.em import EMInit, EMResult, em_fit
from app.model.gaussian import DriverProfile
from app.model.generative import GenerativeModel

logger = logging.getLogger(__name__)

DEFAULT_REGISTRATION_ITERATIONS = 200


def register_profile(X: np.ndarray, model: GenerativeModel,
                     n_iter: int = DEFAULT_REGISTRATION_ITERATIONS) -> EMResult:
    """Weights-only EM on projected points X against the model's frozen states."""
    init = EMInit(model.states, np.full((1, model.states.Q), 1.0 / model.states.Q))
    return em_fit([X], model.states.Q, n_iter, init=init, freeze_states=True)


def register_driver(model: GenerativeModel, driver_id: str,
                    new_driver_data: Union[np.ndarray, Sequence[CarFollowingSequence]],
                    n_iter: int = DEFAULT_REGISTRATION_ITERATIONS) -> GenerativeModel:
    """
    Register a new driver from their own windows or raw feature vectors.

    Args:
        model: Trained model
        driver_id: Id of the new driver; must not already exist
        new_driver_data: Windows, or an (N, 8) raw feature matrix
        n_iter: Weights-only EM iterations

    Returns:
        GenerativeModel: New model with the extra profile
    """
    if driver_id in model.profiles:
        raise DuplicateDriverError(f"Driver '{driver_id}' is already registered")

    if isinstance(new_driver_data, np.ndarray):
        raw = np.atleast_2d(new_driver_data)
    else:
        raw = model.featurize(list(new_driver_data))
    if raw.shape[0] < 1:
        raise ValidationError(f"Registration of '{driver_id}' needs at least one sample")

    result = register_profile(model.embed(raw), model, n_iter)
    logger.info(f"Registered driver {driver_id} from {raw.shape[0]} samples "
                f"(log-likelihood {result.final_log_likelihood:.4f})")
    return model.with_profile(driver_id, DriverProfile(result.weights[0]))
