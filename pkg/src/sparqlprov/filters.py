"""Filter expressions.

The fragment keeps filters small: (in)equality between variables and
constants, BOUND, boolean connectives, constants, and EXISTS / NOT EXISTS
over a graph pattern. Comparison on an unbound variable is false rather than
an error, and negation is plain boolean negation, so no three-valued logic is
needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .rdf import Term
from .patterns import Variable

if TYPE_CHECKING:
    from .patterns import GraphPattern


@dataclass(frozen=True)
class ConstTrue:
    pass


@dataclass(frozen=True)
class ConstFalse:
    pass


@dataclass(frozen=True)
class Eq:
    left: Term | Variable
    right: Term | Variable


@dataclass(frozen=True)
class Neq:
    left: Term | Variable
    right: Term | Variable


@dataclass(frozen=True)
class Bound:
    var: Variable


@dataclass(frozen=True)
class Not:
    operand: FilterExpr


@dataclass(frozen=True)
class And:
    left: FilterExpr
    right: FilterExpr


@dataclass(frozen=True)
class Or:
    left: FilterExpr
    right: FilterExpr


@dataclass(frozen=True)
class Exists:
    pattern: "GraphPattern"


@dataclass(frozen=True)
class NotExists:
    pattern: "GraphPattern"


FilterExpr = ConstTrue | ConstFalse | Eq | Neq | Bound | Not | And | Or | Exists | NotExists

TRUE = ConstTrue()
FALSE = ConstFalse()
