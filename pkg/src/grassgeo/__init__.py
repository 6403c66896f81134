"""Differential geometry of Grassmannians of projections in finite-dimensional C*-algebras."""

from .errors import BranchCutError, CrossCheckError, GrassgeoError, ShapeMismatchError, ValidationError
from .matcore import DEFAULT_TOL, AlgebraShape, Block, Element, Tolerances

__version__ = "0.1.0"
