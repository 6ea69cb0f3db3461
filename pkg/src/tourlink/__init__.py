"""Tournament linkage algorithms.

Flow-based connectivity with Menger certificates, an exact disjoint-paths
oracle, nearly-regular and multi-order chain primitives, greedy subdivision
embedding, the constructive linkage pipeline, and certified counterexample
generators, plus a batch CLI.
"""

from .errors import (
    GenerationError,
    InfeasibleSystemError,
    MalformedTournamentError,
    StructuredFailure,
)
from .rng import GENERATOR_NAME, DeterministicRng
from .tournament import Tournament, random_tournament

__all__ = [
    "DeterministicRng",
    "GENERATOR_NAME",
    "GenerationError",
    "InfeasibleSystemError",
    "MalformedTournamentError",
    "StructuredFailure",
    "Tournament",
    "random_tournament",
]
