"""Code verification of elastostatic finite element solvers by manufactured solutions."""
from .constitutive import REFERENCE_MATERIAL, CaseId, MaterialParams, from_lame
from .errors import MmsError
from .manufactured import REFERENCE_FIELD, MmsField

__version__ = "0.1.0"

__all__ = [
    "CaseId", "MaterialParams", "MmsError", "MmsField", "REFERENCE_FIELD",
    "REFERENCE_MATERIAL", "__version__", "from_lame",
]
