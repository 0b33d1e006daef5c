"""Hilbert transforms and maximal functions along homogeneous curves."""

from .curve_model import CurveParams, ParamSet, covering_number, lacunary_selection
from .multiplier import MultiplierEvaluator, m_axis, m_point

__all__ = ["CurveParams", "ParamSet", "covering_number", "lacunary_selection",
           "MultiplierEvaluator", "m_axis", "m_point"]
__version__ = "0.1.0"
