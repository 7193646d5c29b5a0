"""Variant reference evaluator: EXISTS by shared-variable agreement.

The main reference evaluator (`sparqlprov.refeval`) tests EXISTS by
substituting the current solution into the subpattern and evaluating the
result.  The relational translation instead joins the pattern with the
subpattern's translation on their shared variables, so a variable the
current solution binds but a candidate witness leaves unbound is a
mismatch, not a wildcard.  The two readings disagree on a small family of
patterns (see test_divergence.py for pinned cases).

This module implements the join reading so randomized mismatches can be
classified mechanically: a case where the engine differs from the main
evaluator is only acceptable if its pattern uses EXISTS / NOT EXISTS and
the engine agrees exactly with this variant.

Everything except the EXISTS cases is the same multiset semantics as
`sparqlprov.refeval`, and the shared pieces are imported from there.
"""

from __future__ import annotations

from sparqlprov import filters as flt
from sparqlprov.patterns import (
    And,
    Empty,
    Filter,
    Graph,
    GraphPattern,
    Minus,
    Optional,
    TriplePattern,
    Union,
    var_of,
)
from sparqlprov.rdf import Dataset, Iri
from sparqlprov.refeval import (
    EMPTY_MAPPING,
    Mapping,
    SolutionMultiset,
    _match_triple,
    _resolve,
    compatible,
    join,
    merge,
    minus,
    union,
)


def evaluate(pattern: GraphPattern, dataset: Dataset, gid: int = 0) -> SolutionMultiset:
    if isinstance(pattern, Empty):
        return {EMPTY_MAPPING: 1}
    if isinstance(pattern, TriplePattern):
        out: SolutionMultiset = {}
        for triple in dataset.graph(gid):
            m = _match_triple(pattern, triple)
            if m is not None:
                out[m] = 1
        return out
    if isinstance(pattern, And):
        return join(evaluate(pattern.left, dataset, gid), evaluate(pattern.right, dataset, gid))
    if isinstance(pattern, Union):
        return union(evaluate(pattern.left, dataset, gid), evaluate(pattern.right, dataset, gid))
    if isinstance(pattern, Minus):
        return minus(evaluate(pattern.left, dataset, gid), evaluate(pattern.right, dataset, gid))
    if isinstance(pattern, Optional):
        condition = pattern.condition if pattern.condition is not None else flt.TRUE
        o1 = evaluate(pattern.left, dataset, gid)
        o2 = evaluate(pattern.right, dataset, gid)
        out: SolutionMultiset = {}
        for m1, c1 in o1.items():
            for m2, c2 in o2.items():
                if compatible(m1, m2):
                    m = merge(m1, m2)
                    if satisfies(m, condition, dataset, gid):
                        out[m] = out.get(m, 0) + c1 * c2
        return union(out, _diff(o1, o2, condition, dataset, gid))
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


def _diff(
    o1: SolutionMultiset,
    o2: SolutionMultiset,
    condition: flt.FilterExpr,
    dataset: Dataset,
    gid: int,
) -> SolutionMultiset:
    out: SolutionMultiset = {}
    for m1, c1 in o1.items():
        if all(
            not compatible(m1, m2) or not satisfies(merge(m1, m2), condition, dataset, gid)
            for m2 in o2
        ):
            out[m1] = c1
    return out


def satisfies(mapping: Mapping, expr: flt.FilterExpr, dataset: Dataset, gid: int) -> bool:
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
        return _witnessed(mapping, expr.pattern, dataset, gid)
    if isinstance(expr, flt.NotExists):
        return not _witnessed(mapping, expr.pattern, dataset, gid)
    raise TypeError(f"not a filter expression: {expr!r}")


def _witnessed(mapping: Mapping, subpattern: GraphPattern, dataset: Dataset, gid: int) -> bool:
    """True iff some solution of the subpattern binds every variable it
    shares with the current solution's domain to the same term."""
    shared = {v.name for v in var_of(subpattern)} & set(mapping.domain())
    return any(
        all(candidate.get(name) == mapping.get(name) for name in shared)
        for candidate in evaluate(subpattern, dataset, gid)
    )
