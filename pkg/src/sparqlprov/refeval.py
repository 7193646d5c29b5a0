"""Reference evaluator: multiset semantics for the pattern algebra.

This is the ground truth the relational translation is validated against. It
works directly on parsed datasets and patterns with solution mappings
(partial functions from variables to terms) and keeps exact multiplicities.
EXISTS conditions are evaluated by substituting the current mapping into the
subpattern and testing for a nonempty result.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import filters as flt
from .patterns import (
    And,
    Empty,
    Filter,
    Graph,
    GraphPattern,
    Minus,
    Optional,
    TermOrVar,
    TriplePattern,
    Union,
    Variable,
)
from .rdf import Dataset, Iri, Term, Triple


@dataclass(frozen=True)
class Mapping:
    """A solution mapping; bindings sorted by variable name."""

    bindings: tuple[tuple[str, Term], ...]

    @classmethod
    def of(cls, values: dict[str, Term]) -> Mapping:
        return cls(tuple(sorted(values.items())))

    def get(self, name: str) -> Term | None:
        for var, term in self.bindings:
            if var == name:
                return term
        return None

    def domain(self) -> frozenset[str]:
        return frozenset(var for var, _ in self.bindings)

    def as_dict(self) -> dict[str, Term]:
        return dict(self.bindings)


EMPTY_MAPPING = Mapping(())

# multiset of solutions: mapping -> multiplicity >= 1
SolutionMultiset = dict[Mapping, int]


def compatible(m1: Mapping, m2: Mapping) -> bool:
    """Mappings agree on every shared variable."""
    d2 = m2.as_dict()
    return all(var not in d2 or d2[var] == term for var, term in m1.bindings)


def merge(m1: Mapping, m2: Mapping) -> Mapping:
    merged = m1.as_dict()
    merged.update(m2.bindings)
    return Mapping.of(merged)


def join(o1: SolutionMultiset, o2: SolutionMultiset) -> SolutionMultiset:
    out: SolutionMultiset = {}
    for m1, c1 in o1.items():
        for m2, c2 in o2.items():
            if compatible(m1, m2):
                m = merge(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
    return out


def union(o1: SolutionMultiset, o2: SolutionMultiset) -> SolutionMultiset:
    out = dict(o1)
    for m, c in o2.items():
        out[m] = out.get(m, 0) + c
    return out


def minus(o1: SolutionMultiset, o2: SolutionMultiset) -> SolutionMultiset:
    """Keep solutions of o1 no compatible o2-solution shares a variable with."""
    out: SolutionMultiset = {}
    for m1, c1 in o1.items():
        dom1 = m1.domain()
        if all(
            not compatible(m1, m2) or not (dom1 & m2.domain())
            for m2 in o2
        ):
            out[m1] = c1
    return out


def diff(
    o1: SolutionMultiset,
    o2: SolutionMultiset,
    condition: flt.FilterExpr,
    dataset: Dataset,
    gid: int,
) -> SolutionMultiset:
    """Solutions of o1 that no compatible o2-solution extends to satisfy the
    condition; the unmatched half of a left join."""
    out: SolutionMultiset = {}
    for m1, c1 in o1.items():
        if all(
            not compatible(m1, m2) or not satisfies(merge(m1, m2), condition, dataset, gid)
            for m2 in o2
        ):
            out[m1] = c1
    return out


def left_join(
    o1: SolutionMultiset,
    o2: SolutionMultiset,
    condition: flt.FilterExpr,
    dataset: Dataset,
    gid: int,
) -> SolutionMultiset:
    out: SolutionMultiset = {}
    for m1, c1 in o1.items():
        for m2, c2 in o2.items():
            if compatible(m1, m2):
                m = merge(m1, m2)
                if satisfies(m, condition, dataset, gid):
                    out[m] = out.get(m, 0) + c1 * c2
    return union(out, diff(o1, o2, condition, dataset, gid))


def _match_triple(pattern: TriplePattern, triple: Triple) -> Mapping | None:
    bindings: dict[str, Term] = {}
    for part, value in (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    ):
        if isinstance(part, Variable):
            bound = bindings.get(part.name)
            if bound is not None and bound != value:
                return None
            bindings[part.name] = value
        elif part != value:
            return None
    return Mapping.of(bindings)


def evaluate(pattern: GraphPattern, dataset: Dataset, gid: int = 0) -> SolutionMultiset:
    """Evaluate a pattern against the active graph ``gid`` (0 = default)."""
    if isinstance(pattern, Empty):
        return {EMPTY_MAPPING: 1}
    if isinstance(pattern, TriplePattern):
        out: SolutionMultiset = {}
        for triple in dataset.graph(gid):
            m = _match_triple(pattern, triple)
            if m is not None:
                out[m] = 1  # distinct triples yield distinct mappings
        return out
    if isinstance(pattern, And):
        return join(evaluate(pattern.left, dataset, gid), evaluate(pattern.right, dataset, gid))
    if isinstance(pattern, Union):
        return union(evaluate(pattern.left, dataset, gid), evaluate(pattern.right, dataset, gid))
    if isinstance(pattern, Minus):
        return minus(evaluate(pattern.left, dataset, gid), evaluate(pattern.right, dataset, gid))
    if isinstance(pattern, Optional):
        condition = pattern.condition if pattern.condition is not None else flt.TRUE
        return left_join(
            evaluate(pattern.left, dataset, gid),
            evaluate(pattern.right, dataset, gid),
            condition,
            dataset,
            gid,
        )
    if isinstance(pattern, Filter):
        inner = evaluate(pattern.pattern, dataset, gid)
        return {
            m: c for m, c in inner.items()
            if satisfies(m, pattern.condition, dataset, gid)
        }
    if isinstance(pattern, Graph):
        if isinstance(pattern.name, Iri):
            target = dataset.gid_of(pattern.name)
            if target is None:
                return {}
            return evaluate(pattern.pattern, dataset, target)
        out = {}
        for i, (iri, _) in enumerate(dataset.named_graphs, start=1):
            bound = {Mapping.of({pattern.name.name: iri}): 1}
            out = union(out, join(evaluate(pattern.pattern, dataset, i), bound))
        return out
    raise TypeError(f"not a graph pattern: {pattern!r}")


def satisfies(mapping: Mapping, expr: flt.FilterExpr, dataset: Dataset, gid: int) -> bool:
    """Filter semantics; comparisons involving an unbound variable are false."""
    if isinstance(expr, flt.ConstTrue):
        return True
    if isinstance(expr, flt.ConstFalse):
        return False
    if isinstance(expr, (flt.Eq, flt.Neq)):
        left = _resolve(mapping, expr.left)
        right = _resolve(mapping, expr.right)
        if left is None or right is None:
            return False
        return (left == right) == isinstance(expr, flt.Eq)
    if isinstance(expr, flt.Bound):
        return mapping.get(expr.var.name) is not None
    if isinstance(expr, flt.Not):
        return not satisfies(mapping, expr.operand, dataset, gid)
    if isinstance(expr, flt.And):
        return satisfies(mapping, expr.left, dataset, gid) and satisfies(
            mapping, expr.right, dataset, gid
        )
    if isinstance(expr, flt.Or):
        return satisfies(mapping, expr.left, dataset, gid) or satisfies(
            mapping, expr.right, dataset, gid
        )
    if isinstance(expr, flt.Exists):
        return bool(evaluate(substitute(mapping, expr.pattern), dataset, gid))
    if isinstance(expr, flt.NotExists):
        return not evaluate(substitute(mapping, expr.pattern), dataset, gid)
    raise TypeError(f"not a filter expression: {expr!r}")


def _resolve(mapping: Mapping, operand: TermOrVar) -> Term | None:
    if isinstance(operand, Variable):
        return mapping.get(operand.name)
    return operand


def substitute(mapping: Mapping, pattern: GraphPattern) -> GraphPattern:
    """Instantiate a pattern: every variable bound by the mapping becomes its
    term, inside triple positions, graph names, and filter conditions."""
    if isinstance(pattern, Empty):
        return pattern
    if isinstance(pattern, TriplePattern):
        return TriplePattern(
            _subst_atom(mapping, pattern.subject),
            _subst_atom(mapping, pattern.predicate),
            _subst_atom(mapping, pattern.object),
        )
    if isinstance(pattern, And):
        return And(substitute(mapping, pattern.left), substitute(mapping, pattern.right))
    if isinstance(pattern, Union):
        return Union(substitute(mapping, pattern.left), substitute(mapping, pattern.right))
    if isinstance(pattern, Minus):
        return Minus(substitute(mapping, pattern.left), substitute(mapping, pattern.right))
    if isinstance(pattern, Optional):
        condition = (
            _subst_expr(mapping, pattern.condition) if pattern.condition is not None else None
        )
        return Optional(
            substitute(mapping, pattern.left),
            substitute(mapping, pattern.right),
            condition,
        )
    if isinstance(pattern, Filter):
        return Filter(
            substitute(mapping, pattern.pattern),
            _subst_expr(mapping, pattern.condition),
        )
    if isinstance(pattern, Graph):
        name: TermOrVar = pattern.name
        if isinstance(name, Variable):
            bound = mapping.get(name.name)
            if bound is not None:
                if not isinstance(bound, Iri):
                    # a non-IRI can name no graph: the pattern cannot match
                    return Filter(Empty(), flt.FALSE)
                name = bound
        return Graph(name, substitute(mapping, pattern.pattern))
    raise TypeError(f"not a graph pattern: {pattern!r}")


def _subst_atom(mapping: Mapping, atom: TermOrVar) -> TermOrVar:
    if isinstance(atom, Variable):
        bound = mapping.get(atom.name)
        if bound is not None:
            return bound
    return atom


def _subst_expr(mapping: Mapping, expr: flt.FilterExpr) -> flt.FilterExpr:
    if isinstance(expr, (flt.ConstTrue, flt.ConstFalse)):
        return expr
    if isinstance(expr, flt.Eq):
        return flt.Eq(_subst_atom(mapping, expr.left), _subst_atom(mapping, expr.right))
    if isinstance(expr, flt.Neq):
        return flt.Neq(_subst_atom(mapping, expr.left), _subst_atom(mapping, expr.right))
    if isinstance(expr, flt.Bound):
        # BOUND over an already-substituted variable stays a variable test;
        # substitution binds it, so rewrite to a constant
        if mapping.get(expr.var.name) is not None:
            return flt.TRUE
        return expr
    if isinstance(expr, flt.Not):
        return flt.Not(_subst_expr(mapping, expr.operand))
    if isinstance(expr, flt.And):
        return flt.And(_subst_expr(mapping, expr.left), _subst_expr(mapping, expr.right))
    if isinstance(expr, flt.Or):
        return flt.Or(_subst_expr(mapping, expr.left), _subst_expr(mapping, expr.right))
    if isinstance(expr, flt.Exists):
        return flt.Exists(substitute(mapping, expr.pattern))
    if isinstance(expr, flt.NotExists):
        return flt.NotExists(substitute(mapping, expr.pattern))
    raise TypeError(f"not a filter expression: {expr!r}")
