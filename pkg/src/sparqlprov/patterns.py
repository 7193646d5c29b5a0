"""Graph pattern AST and queries.

Patterns are the desugared algebraic form: group syntax from the concrete
grammar is already folded into binary ``And`` / ``Union`` / ``Minus`` /
``Optional`` nodes by the parser. Filter conditions live in
:mod:`sparqlprov.filters`; an ``Optional`` carries the condition of an inner
trailing FILTER directly, since the pair is evaluated together.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .rdf import Iri, Term

if TYPE_CHECKING:
    from .filters import FilterExpr


class ProjectionError(Exception):
    """SELECT names a variable the pattern cannot bind."""


@dataclass(frozen=True)
class Variable:
    name: str  # without the '?' sigil

    def __str__(self) -> str:
        return f"?{self.name}"


TermOrVar = Term | Variable


@dataclass(frozen=True)
class Empty:
    """The unit pattern; one solution, the empty mapping."""


@dataclass(frozen=True)
class TriplePattern:
    subject: TermOrVar
    predicate: TermOrVar
    object: TermOrVar


@dataclass(frozen=True)
class And:
    left: GraphPattern
    right: GraphPattern


@dataclass(frozen=True)
class Union:
    left: GraphPattern
    right: GraphPattern


@dataclass(frozen=True)
class Minus:
    left: GraphPattern
    right: GraphPattern


@dataclass(frozen=True)
class Optional:
    left: GraphPattern
    right: GraphPattern
    condition: "FilterExpr | None" = None  # inner trailing FILTER, if any


@dataclass(frozen=True)
class Filter:
    pattern: GraphPattern
    condition: "FilterExpr"


@dataclass(frozen=True)
class Graph:
    """GRAPH name { P }: evaluate P against a named graph."""

    name: Iri | Variable
    pattern: GraphPattern


GraphPattern = Empty | TriplePattern | And | Union | Minus | Optional | Filter | Graph


@dataclass(frozen=True)
class Query:
    prefixes: tuple[tuple[str, str], ...]
    projection: tuple[Variable, ...] | None  # None means SELECT *
    pattern: GraphPattern


def var_of(pattern: GraphPattern) -> tuple[Variable, ...]:
    """In-scope variables of a pattern, sorted by name.

    MINUS exposes only its left side; filter conditions bind nothing, so
    their variables (including those of EXISTS subpatterns) do not count.
    """
    return tuple(sorted(_var_set(pattern), key=lambda v: v.name))


def _var_set(pattern: GraphPattern) -> set[Variable]:
    if isinstance(pattern, Empty):
        return set()
    if isinstance(pattern, TriplePattern):
        return {
            t for t in (pattern.subject, pattern.predicate, pattern.object)
            if isinstance(t, Variable)
        }
    if isinstance(pattern, (And, Union, Optional)):
        return _var_set(pattern.left) | _var_set(pattern.right)
    if isinstance(pattern, Minus):
        return _var_set(pattern.left)
    if isinstance(pattern, Filter):
        return _var_set(pattern.pattern)
    if isinstance(pattern, Graph):
        inner = _var_set(pattern.pattern)
        if isinstance(pattern.name, Variable):
            inner = inner | {pattern.name}
        return inner
    raise TypeError(f"not a graph pattern: {pattern!r}")


def projected_variables(query: Query) -> tuple[Variable, ...]:
    """The output columns of a query; validates explicit projections."""
    scope = var_of(query.pattern)
    if query.projection is None:
        return scope
    in_scope = set(scope)
    for v in query.projection:
        if v not in in_scope:
            raise ProjectionError(f"projected variable {v} cannot be bound by the pattern")
    return query.projection
