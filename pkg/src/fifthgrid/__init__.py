"""Pitch estimation on a note grid ordered by fifths.

Submodules: ``lattice`` (grid, group action, shapes), ``edgecases`` (false
fundamentals and their types), ``reduction`` (reduction graphs),
``prevalence`` (Monte Carlo study), ``dsp`` (audio to grid), ``estimators``,
``evaluation``, ``render`` and ``cli``.
"""
from .edgecases import EdgeType, classify_generators, enumerate_basic_cases
from .lattice import (
    Configuration,
    GroupElement,
    Interpretation,
    Note,
    build_interpretation,
    exhibits_shape,
    parse_note,
)
from .reduction import GeneratorSet, reduction_graph

__version__ = "0.1.0"

__all__ = [
    "Configuration", "EdgeType", "GeneratorSet", "GroupElement", "Interpretation", "Note",
    "build_interpretation", "classify_generators", "enumerate_basic_cases", "exhibits_shape",
    "parse_note", "reduction_graph",
]
