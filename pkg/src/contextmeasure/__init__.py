"""Context-aware evaluation of (camouflaged) foreground segmentation maps."""

from .baselines import BaselineParams, e_measure, f_beta, f_beta_w, iou, mae, s_measure
from .camo import CamoParams, camouflage_map, quantify
from .cmeasure import CAMO, GENERIC, CmParams, context_measure, context_measure_camo
from .colorimetry import ciede2000, rgb_to_lab
from .core import binarize_adaptive, foreground_pixels, morph
from .metrics import build_registry

__all__ = [
    "BaselineParams",
    "CAMO",
    "CamoParams",
    "CmParams",
    "GENERIC",
    "binarize_adaptive",
    "build_registry",
    "camouflage_map",
    "ciede2000",
    "context_measure",
    "context_measure_camo",
    "e_measure",
    "f_beta",
    "f_beta_w",
    "foreground_pixels",
    "iou",
    "mae",
    "morph",
    "quantify",
    "rgb_to_lab",
    "s_measure",
]

__version__ = "0.1.0"
