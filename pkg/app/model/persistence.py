"""
Model Persistence

Versioned JSON document:
    {version, hyper, standardizer: {mean, std}, A: [[row]...],
     states: [{mu, sigma}], profiles: {driver_id: omega}}

Floats are written with Python's shortest round-trip repr, so a save/load
cycle reproduces every parameter bit for bit.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np

from app.core.errors import DriveStateError, ModelFormatError
from app.features.projection import ProjectionModel, Standardizer
from app.model.gaussian import DriverProfile, StatePool
from app.model.generative import GenerativeModel, ModelHyper
from app.utils.files import atomic_write_text

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def model_to_document(model: GenerativeModel) -> Dict[str, Any]:
    return {
        'version': FORMAT_VERSION,
        'hyper': model.hyper.to_dict(),
        'standardizer': {
            'mean': model.standardizer.mean.tolist(),
            'std': model.standardizer.std.tolist()
        },
        'A': model.projection.A.tolist(),
        'states': [
            {'mu': model.states.means[q].tolist(), 'sigma': model.states.covariances[q].tolist()}
            for q in range(model.states.Q)
        ],
        'profiles': {driver_id: profile.weights.tolist() for driver_id, profile in model.profiles.items()}
    }


def model_from_document(document: Dict[str, Any]) -> GenerativeModel:
    """
    Rebuild a model from its JSON document.

    Raises:
        ModelFormatError: on a version mismatch or a malformed document
    """
    if not isinstance(document, dict):
        raise ModelFormatError("Model document must be a JSON object")
    version = document.get('version')
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"Unsupported model version {version!r}, expected {FORMAT_VERSION}",
                               reason="schema_version")
    try:
        states = document['states']
        return GenerativeModel(
            projection=ProjectionModel(np.array(document['A'], dtype=float)),
            standardizer=Standardizer(np.array(document['standardizer']['mean']),
                                      np.array(document['standardizer']['std'])),
            states=StatePool(np.array([s['mu'] for s in states], dtype=float),
                             np.array([s['sigma'] for s in states], dtype=float)),
            profiles={str(k): DriverProfile(np.array(w, dtype=float)) for k, w in document['profiles'].items()},
            hyper=ModelHyper(**document['hyper'])
        )
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, DriveStateError) as e:
        raise ModelFormatError(f"Malformed model document: {e}")


def model_to_json(model: GenerativeModel) -> str:
    return json.dumps(model_to_document(model), indent=2) + "\n"


def save_model(model: GenerativeModel, path: Path) -> Path:
    path = atomic_write_text(Path(path), model_to_json(model))
    logger.info(f"Saved model with {model.K} drivers, Q={model.states.Q}, M={model.states.M} to {path}")
    return path


def load_model(path: Path) -> GenerativeModel:
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"Model file not found: {path}", reason="model_missing")
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"Model file {path} is corrupt: {e}", reason="model_corrupt")
    return model_from_document(document)
