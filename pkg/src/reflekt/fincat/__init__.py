"""Finite categories: tables, functors, presentations and constructions."""

from .core import CatFunctor, FinCat, find_isomorphism, functor_from_generators, identity_functor
from .present import (Presentation, escalating_realize, presentation_from_json,
                      presentation_to_json, realize, tautological_presentation)

__all__ = ["CatFunctor", "FinCat", "Presentation", "escalating_realize", "find_isomorphism",
           "functor_from_generators", "identity_functor", "presentation_from_json",
           "presentation_to_json", "realize", "tautological_presentation"]
