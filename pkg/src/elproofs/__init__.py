"""Consequence-based reasoning for EL ontologies with proof extraction and proof metrics."""

from .ontology import CALCULI, Calculus, normalize
from .parser import load_tbox, parse_axiom, parse_tbox
from .saturation import classify, entails, saturate

__all__ = [
    "CALCULI",
    "Calculus",
    "classify",
    "entails",
    "load_tbox",
    "normalize",
    "parse_axiom",
    "parse_tbox",
    "saturate",
]
