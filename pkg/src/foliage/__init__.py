"""Transverse Riemannian geometry of foliations, evaluated numerically.

Modules, bottom-up: :mod:`jet` (second-order forward differentiation),
:mod:`chart` (backends, fields, forms, brackets, ``d``, quadrature),
:mod:`riemannian`, :mod:`foliation`, :mod:`transverse` (Bott connection,
transverse curvature, divergence, Bochner identities), :mod:`hodge` (basic
Hodge theory on ansatz spaces), :mod:`structures` (contact and 3-structures),
:mod:`gallery`, :mod:`report` and :mod:`cli`.
"""

from .chart import Chart, Field, Form, Frame, Sample, SU2Model, integrate, lie_bracket
from .foliation import Foliation
from .gallery import NAMES, GalleryExample, catalogue, construct
from .jet import Jet

__all__ = [
    "Chart", "Field", "Form", "Frame", "Foliation", "GalleryExample", "Jet", "NAMES", "SU2Model", "Sample",
    "catalogue", "construct", "integrate", "lie_bracket",
]
__version__ = "0.1.0"
