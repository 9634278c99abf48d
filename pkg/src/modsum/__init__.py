"""Desk-scale laboratory for modulo zero-sum randomness: the classical
protocols built on it, the GHZ-based generation and verification layer, the
adversary models, and the exact statistical checks of every secrecy claim."""

__version__ = "0.1.0"

from .fields import ExtFieldSpec, FieldElement, FieldSpec, FieldVector, LinearMap
from .mzsr import ZeroSumBundle, ideal_mzsr, mzsr_from_summation, quantum_mzsr, ring_mzsr

__all__ = [
    "__version__",
    "ExtFieldSpec", "FieldElement", "FieldSpec", "FieldVector", "LinearMap",
    "ZeroSumBundle", "ideal_mzsr", "mzsr_from_summation", "quantum_mzsr",
    "ring_mzsr",
]
