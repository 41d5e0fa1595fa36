"""Non-binary span programs and the general adversary bound."""

from .config import TOL, Tolerances
from .functions import CertificateStructure, PartialFunction, Relation
from .span import ComplexityReport, Kind, SpanProgram, WitnessSet

__all__ = ["TOL", "Tolerances", "PartialFunction", "Relation", "CertificateStructure",
           "SpanProgram", "WitnessSet", "Kind", "ComplexityReport"]
__version__ = "0.1.0"
