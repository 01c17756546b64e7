"""Smeared stabilizer projectors for squeezed-cat and GKP codes in a truncated Fock space."""
from . import circuit, codes, fock, noise, projector, sampler
from .errors import ProjsqError

__all__ = ["circuit", "codes", "fock", "noise", "projector", "sampler", "ProjsqError"]
__version__ = "0.1.0"
