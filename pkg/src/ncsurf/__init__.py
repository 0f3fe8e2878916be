"""Exact symbolic toolkit for noncommutative cluster structures on marked
surfaces: triangulations and flips, triangle-group models with monomial
mutation, cluster braid actions, noncommutative Laurent expansions, and the
commutative/quantum specialization."""

__version__ = "0.1.0"
