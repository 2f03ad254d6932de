"""Quasi-exactly solvable double sinh-Gordon / sine-Gordon models.

Exact Bender-Dunne polynomial machinery, QES spectra and eigenfunctions for
the complex PT-symmetric, periodic and real hyperbolic families, with
independent numerical oracles and an sl(2) check of the gauged operator.
"""

from .models import Family, ModelSpec, QESConditionError, check_qes
from .spectra import QESSpectrum, qes_spectrum, wavefunction

__version__ = "0.1.0"

__all__ = ["Family", "ModelSpec", "QESConditionError", "QESSpectrum", "check_qes",
           "qes_spectrum", "wavefunction", "__version__"]
