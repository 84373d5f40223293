"""
Association package.

Iterative belief propagation between legacy scatterers and measurements,
plus an exhaustive oracle for small instances.
"""

from .association import (
    AssocInput,
    AssociationInputError,
    AssocOutput,
    association_marginals,
    exact_association_marginals,
    run_association,
)

__all__ = [
    "AssocInput",
    "AssocOutput",
    "AssociationInputError",
    "association_marginals",
    "exact_association_marginals",
    "run_association",
]
