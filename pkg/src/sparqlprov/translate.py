"""Compile graph patterns into annotated relational algebra.

Every pattern P translates, relative to a graph attribute ``G``, into an
expression whose schema is ``[G] + var(P)`` (variables in lexicographic
order). Rows pair a graph id with one solution; variables the solution
leaves unbound hold the padding value. The top-level query translation pins
``G`` to the default graph and projects the requested variables, so result
rows correspond one-to-one with solution mappings, each annotated by the
semiring expression describing its derivation.

Shared variables between operands are kept apart with locally primed copies
(``?x'``, ``?x''``); these never collide because subexpression schemas only
carry unprimed variables, one graph attribute, and existence flags.
"""

from __future__ import annotations

from . import filters as flt
from . import krel as ra
from . import patterns as pat
from .rdf import Iri, encode_term
from .patterns import projected_variables, var_of


class NameSupply:
    """Issues globally fresh graph attributes and existence flags."""

    def __init__(self) -> None:
        self._graphs = 0
        self._exists = 0

    def fresh_graph(self) -> str:
        self._graphs += 1
        return f"#G{self._graphs}"

    def fresh_ex(self) -> str:
        self._exists += 1
        return f"#ex{self._exists}"


def var_attr(v: pat.Variable) -> str:
    return f"?{v.name}"


def _prime(attr: str) -> str:
    return attr + "'"


def _double_prime(attr: str) -> str:
    return attr + "''"


def _keep_cols(g: str, attrs: list[str]) -> tuple[ra.ProjCol, ...]:
    return (ra.Keep(g),) + tuple(ra.Keep(a) for a in attrs)


def _attrs(variables: tuple[pat.Variable, ...]) -> list[str]:
    return [var_attr(v) for v in variables]


def _pad_cols(g: str, have: set[str], want: list[str]) -> tuple[ra.ProjCol, ...]:
    cols: list[ra.ProjCol] = [ra.Keep(g)]
    for attr in want:
        cols.append(ra.Keep(attr) if attr in have else ra.Computed(attr, ra.ConstUnb()))
    return tuple(cols)


def translate_empty(g: str) -> ra.RAExpr:
    """The unit pattern: one row per graph, no variable columns."""
    return ra.Project((ra.Keep(g),), ra.Rename((("gid", g),), ra.BaseGraphs()))


_POSITIONS = ("sub", "pred", "obj")


def translate_triple(tp: pat.TriplePattern, g: str) -> ra.RAExpr:
    """Match one triple pattern: select constants (and equate repeated
    variables), rename each variable's first position, project."""
    atoms = (tp.subject, tp.predicate, tp.object)
    preds: list[ra.SelPredicate] = []
    var_positions: dict[str, list[str]] = {}
    for position, atom in zip(_POSITIONS, atoms):
        if isinstance(atom, pat.Variable):
            var_positions.setdefault(atom.name, []).append(position)
        else:
            preds.append(ra.AttrEqConst(position, encode_term(atom)))
    for positions in var_positions.values():
        for i in range(len(positions)):
            for j in range(i + 1, len(positions)):
                preds.append(ra.AttrEqAttr(positions[i], positions[j]))
    expr: ra.RAExpr = ra.BaseQuads()
    if preds:
        expr = ra.Select(ra.conj(preds), expr)
    renames = [("gid", g)]
    renames.extend(
        (positions[0], f"?{name}") for name, positions in var_positions.items()
    )
    expr = ra.Rename(tuple(renames), expr)
    cols = _keep_cols(g, sorted(f"?{name}" for name in var_positions))
    return ra.Project(cols, expr)


def translate_union(
    p1: pat.GraphPattern, p2: pat.GraphPattern, g: str, supply: NameSupply
) -> ra.RAExpr:
    e1 = translate_pattern(p1, g, supply)
    e2 = translate_pattern(p2, g, supply)
    return _union_expr(e1, _attrs(var_of(p1)), e2, _attrs(var_of(p2)), g)


def _union_expr(
    e1: ra.RAExpr, attrs1: list[str], e2: ra.RAExpr, attrs2: list[str], g: str
) -> ra.RAExpr:
    want = sorted(set(attrs1) | set(attrs2))
    return ra.Union(
        ra.Project(_pad_cols(g, set(attrs1), want), e1),
        ra.Project(_pad_cols(g, set(attrs2), want), e2),
    )


def translate_and(
    p1: pat.GraphPattern, p2: pat.GraphPattern, g: str, supply: NameSupply
) -> ra.RAExpr:
    e1 = translate_pattern(p1, g, supply)
    e2 = translate_pattern(p2, g, supply)
    return _and_expr(e1, _attrs(var_of(p1)), e2, _attrs(var_of(p2)), g)


def _and_expr(
    e1: ra.RAExpr, attrs1: list[str], e2: ra.RAExpr, attrs2: list[str], g: str
) -> ra.RAExpr:
    """Join two translations; shared variables unify when either side is
    unbound or both agree, the bound value (if any) surviving."""
    shared = sorted(set(attrs1) & set(attrs2))
    want = sorted(set(attrs1) | set(attrs2))
    if not shared:
        return ra.Project(_keep_cols(g, want), ra.NatJoin(e1, e2))
    left = ra.Rename(tuple((a, _prime(a)) for a in shared), e1)
    right = ra.Rename(tuple((a, _double_prime(a)) for a in shared), e2)
    compat = ra.conj(
        ra.disj(
            [
                ra.AttrEqConst(_prime(a), ra.UNB),
                ra.AttrEqConst(_double_prime(a), ra.UNB),
                ra.AttrEqAttr(_prime(a), _double_prime(a)),
            ]
        )
        for a in shared
    )
    cols: list[ra.ProjCol] = [ra.Keep(g)]
    for attr in want:
        if attr in shared:
            cols.append(ra.Computed(attr, ra.First(_prime(attr), _double_prime(attr))))
        else:
            cols.append(ra.Keep(attr))
    return ra.Project(tuple(cols), ra.Select(compat, ra.NatJoin(left, right)))


def translate_minus(
    p1: pat.GraphPattern, p2: pat.GraphPattern, g: str, supply: NameSupply
) -> ra.RAExpr:
    """Remove solutions some compatible, domain-sharing right solution
    matches; with no shared variables the right side is irrelevant."""
    e1 = translate_pattern(p1, g, supply)
    attrs1 = _attrs(var_of(p1))
    shared = sorted(set(attrs1) & set(_attrs(var_of(p2))))
    if not shared:
        return e1
    e2 = translate_pattern(p2, g, supply)
    renamed = ra.Rename(tuple((a, _prime(a)) for a in shared), e2)
    compat = [
        ra.disj(
            [
                ra.AttrEqConst(a, ra.UNB),
                ra.AttrEqConst(_prime(a), ra.UNB),
                ra.AttrEqAttr(a, _prime(a)),
            ]
        )
        for a in shared
    ]
    domains_disjoint = ra.conj(
        ra.disj([ra.AttrEqConst(a, ra.UNB), ra.AttrEqConst(_prime(a), ra.UNB)])
        for a in shared
    )
    matched = ra.Project(
        _keep_cols(g, attrs1),
        ra.Select(
            ra.conj([*compat, ra.PredNot(domains_disjoint)]),
            ra.NatJoin(e1, renamed),
        ),
    )
    return ra.NatJoin(e1, ra.Diff(ra.DupElim(e1), matched))


def translate_filter(
    p: pat.GraphPattern, condition: flt.FilterExpr, g: str, supply: NameSupply
) -> ra.RAExpr:
    e = translate_pattern(p, g, supply)
    return _filter_expr(e, _attrs(var_of(p)), condition, g, supply)


def _filter_expr(
    e: ra.RAExpr,
    pattern_attrs: list[str],
    condition: flt.FilterExpr,
    g: str,
    supply: NameSupply,
) -> ra.RAExpr:
    """Selection over the pattern's translation.

    Each EXISTS / NOT EXISTS occurrence becomes a join with an existence
    relation pairing every row of the translation with a 0/1 flag; the
    selection then tests flags instead of subqueries.
    """
    occurrences = _exists_occurrences(condition)
    schema = {g, *pattern_attrs}
    if not occurrences:
        return ra.Select(_compile_condition(condition, schema, {}), e)
    joined = e
    flags: dict[int, str] = {}
    for node in occurrences:
        flag = supply.fresh_ex()
        flags[id(node)] = flag
        joined = ra.NatJoin(joined, _exists_relation(e, pattern_attrs, node.pattern, flag, g, supply))
    selected = ra.Select(_compile_condition(condition, schema, flags), joined)
    return ra.Project(_keep_cols(g, pattern_attrs), selected)


def _exists_occurrences(condition: flt.FilterExpr) -> list[flt.Exists | flt.NotExists]:
    """EXISTS-like nodes in left-to-right traversal order, one entry per
    occurrence (object identity, not structural equality)."""
    out: list[flt.Exists | flt.NotExists] = []
    if isinstance(condition, (flt.Exists, flt.NotExists)):
        out.append(condition)
    elif isinstance(condition, flt.Not):
        out.extend(_exists_occurrences(condition.operand))
    elif isinstance(condition, (flt.And, flt.Or)):
        out.extend(_exists_occurrences(condition.left))
        out.extend(_exists_occurrences(condition.right))
    return out


def _exists_relation(
    e: ra.RAExpr,
    pattern_attrs: list[str],
    subpattern: pat.GraphPattern,
    flag: str,
    g: str,
    supply: NameSupply,
) -> ra.RAExpr:
    """Pair each row of ``e`` with 1 if the subpattern has a compatible
    solution for that row's bindings, else 0.

    Compatibility is the join condition ``v = v' or v unbound`` over the
    variables shared between the pattern and the subpattern; a variable the
    row binds but the subpattern solution leaves unbound does not match.
    """
    sub = translate_pattern(subpattern, g, supply)
    shared = sorted(set(pattern_attrs) & set(_attrs(var_of(subpattern))))
    if shared:
        sub = ra.Rename(tuple((a, _prime(a)) for a in shared), sub)
    joined = ra.NatJoin(e, sub)
    matches = ra.conj(
        ra.disj([ra.AttrEqAttr(a, _prime(a)), ra.AttrEqConst(a, ra.UNB)]) for a in shared
    )
    if shared:
        joined = ra.Select(matches, joined)
    witnessed = ra.Project(_keep_cols(g, pattern_attrs), joined)
    support = ra.DupElim(e)
    no_witness = ra.Diff(support, witnessed)
    flag_off = _keep_cols(g, pattern_attrs) + (ra.Computed(flag, ra.ConstGid(0)),)
    flag_on = _keep_cols(g, pattern_attrs) + (ra.Computed(flag, ra.ConstGid(1)),)
    return ra.Union(
        ra.Project(flag_off, no_witness),
        ra.Project(flag_on, ra.Diff(support, no_witness)),
    )


def _compile_condition(
    condition: flt.FilterExpr, schema: set[str], flags: dict[int, str]
) -> ra.SelPredicate:
    """Filter condition to selection predicate over ``[G] + vars`` rows.

    Comparisons treat the padding value as unbound (false); a variable
    absent from the schema can never be bound, so its tests fold to false.
    """
    if isinstance(condition, flt.ConstTrue):
        return ra.TRUE_PRED
    if isinstance(condition, flt.ConstFalse):
        return ra.FALSE_PRED
    if isinstance(condition, flt.Eq):
        return _compile_comparison(condition.left, condition.right, schema, negated=False)
    if isinstance(condition, flt.Neq):
        return _compile_comparison(condition.left, condition.right, schema, negated=True)
    if isinstance(condition, flt.Bound):
        attr = var_attr(condition.var)
        if attr not in schema:
            return ra.FALSE_PRED
        return ra.AttrNeqConst(attr, ra.UNB)
    if isinstance(condition, flt.Not):
        return ra.PredNot(_compile_condition(condition.operand, schema, flags))
    if isinstance(condition, flt.And):
        return ra.conj(
            [
                _compile_condition(condition.left, schema, flags),
                _compile_condition(condition.right, schema, flags),
            ]
        )
    if isinstance(condition, flt.Or):
        return ra.disj(
            [
                _compile_condition(condition.left, schema, flags),
                _compile_condition(condition.right, schema, flags),
            ]
        )
    if isinstance(condition, flt.Exists):
        return ra.AttrNeqConst(flags[id(condition)], 0)
    if isinstance(condition, flt.NotExists):
        return ra.AttrEqConst(flags[id(condition)], 0)
    raise TypeError(f"not a filter expression: {condition!r}")


def _compile_comparison(
    left: pat.TermOrVar, right: pat.TermOrVar, schema: set[str], negated: bool
) -> ra.SelPredicate:
    lvar = isinstance(left, pat.Variable)
    rvar = isinstance(right, pat.Variable)
    if lvar and (var_attr(left) not in schema):
        return ra.FALSE_PRED
    if rvar and (var_attr(right) not in schema):
        return ra.FALSE_PRED
    if lvar and rvar:
        a, b = var_attr(left), var_attr(right)
        if negated:
            return ra.conj(
                [
                    ra.AttrNeqConst(a, ra.UNB),
                    ra.AttrNeqConst(b, ra.UNB),
                    ra.PredNot(ra.AttrEqAttr(a, b)),
                ]
            )
        return ra.conj([ra.AttrEqAttr(a, b), ra.AttrNeqConst(a, ra.UNB)])
    if lvar or rvar:
        attr = var_attr(left) if lvar else var_attr(right)
        value = encode_term(right) if lvar else encode_term(left)
        if negated:
            return ra.conj([ra.AttrNeqConst(attr, ra.UNB), ra.AttrNeqConst(attr, value)])
        return ra.AttrEqConst(attr, value)
    equal = encode_term(left) == encode_term(right)
    return ra.TRUE_PRED if equal != negated else ra.FALSE_PRED


def translate_optional(
    p1: pat.GraphPattern,
    p2: pat.GraphPattern,
    condition: flt.FilterExpr | None,
    g: str,
    supply: NameSupply,
) -> ra.RAExpr:
    """Left join: the conditioned join of both sides, plus the left rows
    with no surviving extension, padded on the right-only variables.

    The matched set is computed over the left side's own values, not the
    unified ones: a left row leaving a shared variable unbound must be
    recognized as matched even though its extensions bind that variable.
    """
    e1 = translate_pattern(p1, g, supply)
    e2 = translate_pattern(p2, g, supply)
    attrs1 = _attrs(var_of(p1))
    attrs2 = _attrs(var_of(p2))
    both = _and_expr(e1, attrs1, e2, attrs2, g)
    if condition is not None and not isinstance(condition, flt.ConstTrue):
        all_attrs = sorted(set(attrs1) | set(attrs2))
        both = _filter_expr(both, all_attrs, condition, g, supply)
    matched = _matched_rows(e1, attrs1, e2, attrs2, condition, g, supply)
    unmatched = ra.NatJoin(e1, ra.Diff(ra.DupElim(e1), matched))
    want = sorted(set(attrs1) | set(attrs2))
    padded = ra.Project(_pad_cols(g, set(attrs1), want), unmatched)
    return ra.Union(both, padded)


def _matched_rows(
    e1: ra.RAExpr,
    attrs1: list[str],
    e2: ra.RAExpr,
    attrs2: list[str],
    condition: flt.FilterExpr | None,
    g: str,
    supply: NameSupply,
) -> ra.RAExpr:
    """Left rows, with their own values, that have at least one compatible
    right extension satisfying the condition."""
    shared = sorted(set(attrs1) & set(attrs2))
    if condition is None or isinstance(condition, flt.ConstTrue):
        # No condition to test, so the unified values are never needed:
        # join the left side as-is against a primed copy of the right.
        renamed = ra.Rename(tuple((a, _prime(a)) for a in shared), e2)
        compat = ra.conj(
            ra.disj(
                [
                    ra.AttrEqConst(a, ra.UNB),
                    ra.AttrEqConst(_prime(a), ra.UNB),
                    ra.AttrEqAttr(a, _prime(a)),
                ]
            )
            for a in shared
        )
        joined = ra.NatJoin(e1, renamed)
        if shared:
            joined = ra.Select(compat, joined)
        return ra.Project(_keep_cols(g, attrs1), joined)
    # The condition reads the unified solution, so build both views: the
    # unified value under each variable's own attribute (for the condition)
    # and the left original under its primed name (to recover the row).
    left = ra.Rename(tuple((a, _prime(a)) for a in shared), e1) if shared else e1
    right = ra.Rename(tuple((a, _double_prime(a)) for a in shared), e2) if shared else e2
    compat = ra.conj(
        ra.disj(
            [
                ra.AttrEqConst(_prime(a), ra.UNB),
                ra.AttrEqConst(_double_prime(a), ra.UNB),
                ra.AttrEqAttr(_prime(a), _double_prime(a)),
            ]
        )
        for a in shared
    )
    joined = ra.NatJoin(left, right)
    if shared:
        joined = ra.Select(compat, joined)
    want = sorted(set(attrs1) | set(attrs2))
    cols: list[ra.ProjCol] = [ra.Keep(g)]
    for attr in want:
        if attr in shared:
            cols.append(ra.Computed(attr, ra.First(_prime(attr), _double_prime(attr))))
        else:
            cols.append(ra.Keep(attr))
    cols.extend(ra.Keep(_prime(a)) for a in shared)
    unified = ra.Project(tuple(cols), joined)
    filtered = _filter_expr(unified, want + [_prime(a) for a in shared], condition, g, supply)
    back = tuple(
        ra.Keep(_prime(a)) if a in shared else ra.Keep(a) for a in attrs1
    )
    projected = ra.Project((ra.Keep(g),) + back, filtered)
    if not shared:
        return projected
    return ra.Rename(tuple((_prime(a), a) for a in shared), projected)


def translate_graph(
    name: Iri | pat.Variable, p: pat.GraphPattern, g: str, supply: NameSupply
) -> ra.RAExpr:
    """Evaluate the body against a named graph, fixed or variable."""
    inner_g = supply.fresh_graph()
    body = translate_pattern(p, inner_g, supply)
    if isinstance(name, Iri):
        named = ra.Project(
            (ra.Keep(inner_g),),
            ra.Rename(
                (("gid", inner_g),),
                ra.Select(ra.AttrEqConst("iri", encode_term(name)), ra.BaseGraphs()),
            ),
        )
        right = ra.Project(
            tuple(ra.Keep(a) for a in _attrs(var_of(p))),
            ra.NatJoin(named, body),
        )
    else:
        named = ra.Rename(
            (("gid", inner_g), ("iri", var_attr(name))),
            ra.Select(ra.GidGreater("gid", 0), ra.BaseGraphs()),
        )
        out_attrs = sorted({var_attr(name), *_attrs(var_of(p))})
        right = ra.Project(
            tuple(ra.Keep(a) for a in out_attrs),
            ra.NatJoin(named, body),
        )
    return ra.NatJoin(translate_empty(g), right)


def translate_pattern(p: pat.GraphPattern, g: str, supply: NameSupply) -> ra.RAExpr:
    """Translate any pattern relative to graph attribute ``g``."""
    if isinstance(p, pat.Empty):
        return translate_empty(g)
    if isinstance(p, pat.TriplePattern):
        return translate_triple(p, g)
    if isinstance(p, pat.And):
        return translate_and(p.left, p.right, g, supply)
    if isinstance(p, pat.Union):
        return translate_union(p.left, p.right, g, supply)
    if isinstance(p, pat.Minus):
        return translate_minus(p.left, p.right, g, supply)
    if isinstance(p, pat.Optional):
        return translate_optional(p.left, p.right, p.condition, g, supply)
    if isinstance(p, pat.Filter):
        return translate_filter(p.pattern, p.condition, g, supply)
    if isinstance(p, pat.Graph):
        return translate_graph(p.name, p.pattern, g, supply)
    raise TypeError(f"not a graph pattern: {p!r}")


def translate_query(query: pat.Query, supply: NameSupply | None = None) -> ra.RAExpr:
    """Whole-query translation: evaluate the pattern on the default graph
    and project the selected variables."""
    supply = supply if supply is not None else NameSupply()
    g = supply.fresh_graph()
    body = ra.NatJoin(translate_empty(g), translate_pattern(query.pattern, g, supply))
    pinned = ra.Select(ra.AttrEqConst(g, 0), body)
    cols = tuple(ra.Keep(var_attr(v)) for v in projected_variables(query))
    return ra.Project(cols, pinned)
