"""Reversible mass-action systems as binomial event-systems."""
from ._backend import BACKEND
from .core import Event, EventSystem, Monomial, canonicalize_event, mass_action_rhs, stoichiometric_matrix
from .parser import load_system, parse_system, serialize_system

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Event",
    "EventSystem",
    "Monomial",
    "canonicalize_event",
    "mass_action_rhs",
    "stoichiometric_matrix",
    "load_system",
    "parse_system",
    "serialize_system",
    "__version__",
]
