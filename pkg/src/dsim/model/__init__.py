"""
src/dsim/model/__init__.py
Prediction and persistence of fitted models.
"""
from dsim.model.predictor import Predictor, index_agreement
from dsim.model.serialization import fit_from_dict, fit_to_dict, load_fit, save_fit

__all__ = ["Predictor", "index_agreement", "fit_from_dict", "fit_to_dict", "load_fit", "save_fit"]
