"""Annotated relations and the relational algebra they support.

A ``KRelation`` maps tuples to annotations drawn from an m-semiring; a tuple
is *in* the relation exactly when its annotation is nonzero, so zero
annotations are never stored. The operator set is positive relational
algebra plus difference (interpreted by the semiring's monus) and duplicate
elimination; expressions are evaluated against the two base relations of a
:class:`~sparqlprov.rdf.BaseDb`, whose rows carry caller-supplied
annotations (identifiers for provenance, ones for counting).

Attribute-name conventions used by the translator: ``gid``/``iri`` and
``gid``/``sub``/``pred``/``obj`` in the base relations, ``?name`` for query
variables, ``#G<n>`` for graph attributes, and ``#ex<n>`` for existence
flags, so the classes never collide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Generic, Iterable, TypeVar

from .rdf import BaseDb
from .semiring import MSemiring


class SchemaMismatch(Exception):
    """Operands disagree on schema, or a projection builds a bad one."""


class UnknownAttribute(Exception):
    """An operator referenced an attribute its input schema lacks."""


class _Unbound:
    """The padding value for variables a solution leaves unbound.

    A dedicated sentinel rather than None or an encoded term: it compares
    equal only to itself, so joins and selections treat unboundness as just
    another value.
    """

    _instance: "_Unbound | None" = None

    def __new__(cls) -> "_Unbound":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNB"


UNB = _Unbound()

# a cell is an encoded term, a graph id, an existence flag, or the padding value
Value = Any


# --- selection predicates ----------------------------------------------


@dataclass(frozen=True)
class PredTrue:
    pass


@dataclass(frozen=True)
class PredFalse:
    pass


@dataclass(frozen=True)
class AttrEqAttr:
    left: str
    right: str


@dataclass(frozen=True)
class AttrEqConst:
    attr: str
    value: Value


@dataclass(frozen=True)
class AttrNeqConst:
    attr: str
    value: Value


@dataclass(frozen=True)
class GidGreater:
    attr: str
    bound: int


@dataclass(frozen=True)
class PredNot:
    operand: SelPredicate


@dataclass(frozen=True)
class PredAnd:
    operands: tuple[SelPredicate, ...]


@dataclass(frozen=True)
class PredOr:
    operands: tuple[SelPredicate, ...]


SelPredicate = (
    PredTrue | PredFalse | AttrEqAttr | AttrEqConst | AttrNeqConst | GidGreater | PredNot
    | PredAnd | PredOr
)

TRUE_PRED = PredTrue()
FALSE_PRED = PredFalse()


def conj(preds: Iterable[SelPredicate]) -> SelPredicate:
    preds = tuple(preds)
    if not preds:
        return TRUE_PRED
    if len(preds) == 1:
        return preds[0]
    return PredAnd(preds)


def disj(preds: Iterable[SelPredicate]) -> SelPredicate:
    preds = tuple(preds)
    if not preds:
        return FALSE_PRED
    if len(preds) == 1:
        return preds[0]
    return PredOr(preds)


# --- projection columns --------------------------------------------------


@dataclass(frozen=True)
class ConstUnb:
    pass


@dataclass(frozen=True)
class ConstGid:
    value: int


@dataclass(frozen=True)
class First:
    """Coalesce: the first attribute's value unless it is UNB."""

    first: str
    second: str


ColValue = ConstUnb | ConstGid | First


@dataclass(frozen=True)
class Keep:
    attr: str


@dataclass(frozen=True)
class Computed:
    attr: str
    value: ColValue


ProjCol = Keep | Computed


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class BaseGraphs:
    pass


@dataclass(frozen=True)
class BaseQuads:
    pass


@dataclass(frozen=True)
class Select:
    predicate: SelPredicate
    input: RAExpr


@dataclass(frozen=True)
class Project:
    cols: tuple[ProjCol, ...]
    input: RAExpr


@dataclass(frozen=True)
class Rename:
    mapping: tuple[tuple[str, str], ...]  # (old, new) pairs
    input: RAExpr


@dataclass(frozen=True)
class NatJoin:
    left: RAExpr
    right: RAExpr


@dataclass(frozen=True)
class Union:
    left: RAExpr
    right: RAExpr


@dataclass(frozen=True)
class Diff:
    left: RAExpr
    right: RAExpr


@dataclass(frozen=True)
class DupElim:
    input: RAExpr


RAExpr = BaseGraphs | BaseQuads | Select | Project | Rename | NatJoin | Union | Diff | DupElim

GRAPHS_SCHEMA = ("gid", "iri")
QUADS_SCHEMA = ("gid", "sub", "pred", "obj")


# --- annotated relations and operators ------------------------------------

K = TypeVar("K")


class KRelation(Generic[K]):
    """A schema plus a map from tuples to nonzero annotations."""

    def __init__(self, schema: tuple[str, ...], rows: dict[tuple[Value, ...], K] | None = None):
        self.schema = schema
        self.rows: dict[tuple[Value, ...], K] = rows if rows is not None else {}

    @classmethod
    def build(
        cls,
        schema: tuple[str, ...],
        items: Iterable[tuple[tuple[Value, ...], K]],
        semiring: MSemiring[K],
    ) -> "KRelation[K]":
        """Accumulate annotated tuples, adding repeats, dropping zeros."""
        rows: dict[tuple[Value, ...], K] = {}
        for row, annotation in items:
            if row in rows:
                rows[row] = semiring.add(rows[row], annotation)
            else:
                rows[row] = annotation
        return cls(schema, {r: a for r, a in rows.items() if not semiring.is_zero(a)})

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, KRelation)
            and self.schema == other.schema
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"KRelation(schema={self.schema}, rows={self.rows})"

    def _index(self, attr: str) -> int:
        try:
            return self.schema.index(attr)
        except ValueError:
            raise UnknownAttribute(f"attribute {attr!r} not in schema {self.schema}") from None


def _eval_pred(pred: SelPredicate, rel: KRelation[K], row: tuple[Value, ...]) -> bool:
    if isinstance(pred, PredTrue):
        return True
    if isinstance(pred, PredFalse):
        return False
    if isinstance(pred, AttrEqAttr):
        return row[rel._index(pred.left)] == row[rel._index(pred.right)]
    if isinstance(pred, AttrEqConst):
        return row[rel._index(pred.attr)] == pred.value
    if isinstance(pred, AttrNeqConst):
        return row[rel._index(pred.attr)] != pred.value
    if isinstance(pred, GidGreater):
        value = row[rel._index(pred.attr)]
        return isinstance(value, int) and value > pred.bound
    if isinstance(pred, PredNot):
        return not _eval_pred(pred.operand, rel, row)
    if isinstance(pred, PredAnd):
        return all(_eval_pred(p, rel, row) for p in pred.operands)
    if isinstance(pred, PredOr):
        return any(_eval_pred(p, rel, row) for p in pred.operands)
    raise TypeError(f"not a selection predicate: {pred!r}")


def ra_select(rel: KRelation[K], pred: SelPredicate, semiring: MSemiring[K]) -> KRelation[K]:
    """Keep rows satisfying the predicate; annotations pass through.

    (Equivalent to multiplying each annotation by 1 or 0 as the predicate
    holds; rows multiplied by 0 leave the support.)
    """
    _validate_pred(pred, rel.schema)
    return KRelation(rel.schema, {r: a for r, a in rel.rows.items() if _eval_pred(pred, rel, r)})


def _validate_pred(pred: SelPredicate, schema: tuple[str, ...]) -> None:
    attrs: list[str] = []
    _collect_pred_attrs(pred, attrs)
    for attr in attrs:
        if attr not in schema:
            raise UnknownAttribute(f"attribute {attr!r} not in schema {schema}")


def _collect_pred_attrs(pred: SelPredicate, out: list[str]) -> None:
    if isinstance(pred, AttrEqAttr):
        out.extend((pred.left, pred.right))
    elif isinstance(pred, (AttrEqConst, AttrNeqConst, GidGreater)):
        out.append(pred.attr)
    elif isinstance(pred, PredNot):
        _collect_pred_attrs(pred.operand, out)
    elif isinstance(pred, (PredAnd, PredOr)):
        for p in pred.operands:
            _collect_pred_attrs(p, out)


def ra_project(rel: KRelation[K], cols: tuple[ProjCol, ...], semiring: MSemiring[K]) -> KRelation[K]:
    """Generalised projection; annotations of merged preimages are summed."""
    out_schema = tuple(c.attr for c in cols)
    if len(set(out_schema)) != len(out_schema):
        raise SchemaMismatch(f"duplicate attribute in projection {out_schema}")
    indices: list[tuple[str, Any]] = []
    for c in cols:
        if isinstance(c, Keep):
            indices.append(("keep", rel._index(c.attr)))
        elif isinstance(c.value, ConstUnb):
            indices.append(("unb", None))
        elif isinstance(c.value, ConstGid):
            indices.append(("const", c.value.value))
        else:
            indices.append(("first", (rel._index(c.value.first), rel._index(c.value.second))))

    def out_row(row: tuple[Value, ...]) -> tuple[Value, ...]:
        values: list[Value] = []
        for kind, arg in indices:
            if kind == "keep":
                values.append(row[arg])
            elif kind == "unb":
                values.append(UNB)
            elif kind == "const":
                values.append(arg)
            else:
                first = row[arg[0]]
                values.append(first if first is not UNB else row[arg[1]])
        return tuple(values)

    return KRelation.build(
        out_schema, ((out_row(r), a) for r, a in rel.rows.items()), semiring
    )


def ra_rename(rel: KRelation[K], mapping: tuple[tuple[str, str], ...]) -> KRelation[K]:
    """Rename attributes in place; must stay a bijection."""
    sources = dict(mapping)
    for old in sources:
        rel._index(old)
    new_schema = tuple(sources.get(a, a) for a in rel.schema)
    if len(set(new_schema)) != len(new_schema):
        raise SchemaMismatch(f"rename produces duplicate attributes {new_schema}")
    return KRelation(new_schema, dict(rel.rows))


def ra_natjoin(r1: KRelation[K], r2: KRelation[K], semiring: MSemiring[K]) -> KRelation[K]:
    """Natural join on shared attributes; annotations multiply."""
    shared = [a for a in r1.schema if a in r2.schema]
    right_extra = [a for a in r2.schema if a not in r1.schema]
    out_schema = r1.schema + tuple(right_extra)
    idx1 = [r1.schema.index(a) for a in shared]
    idx2 = [r2.schema.index(a) for a in shared]
    extra_idx = [r2.schema.index(a) for a in right_extra]
    by_key: dict[tuple[Value, ...], list[tuple[tuple[Value, ...], K]]] = {}
    for row2, a2 in r2.rows.items():
        by_key.setdefault(tuple(row2[i] for i in idx2), []).append((row2, a2))

    def rows() -> Iterable[tuple[tuple[Value, ...], K]]:
        for row1, a1 in r1.rows.items():
            key = tuple(row1[i] for i in idx1)
            for row2, a2 in by_key.get(key, ()):
                yield row1 + tuple(row2[i] for i in extra_idx), semiring.mul(a1, a2)

    return KRelation.build(out_schema, rows(), semiring)


def _require_same_schema(r1: KRelation[K], r2: KRelation[K], op: str) -> None:
    if r1.schema != r2.schema:
        raise SchemaMismatch(f"{op} over schemas {r1.schema} and {r2.schema}")


def ra_union(r1: KRelation[K], r2: KRelation[K], semiring: MSemiring[K]) -> KRelation[K]:
    """Same-schema union; annotations add."""
    _require_same_schema(r1, r2, "union")
    rows = dict(r1.rows)
    for row, a2 in r2.rows.items():
        rows[row] = semiring.add(rows[row], a2) if row in rows else a2
    return KRelation(r1.schema, {r: a for r, a in rows.items() if not semiring.is_zero(a)})


def ra_diff(r1: KRelation[K], r2: KRelation[K], semiring: MSemiring[K]) -> KRelation[K]:
    """Same-schema difference: per-tuple monus of annotations."""
    _require_same_schema(r1, r2, "difference")
    rows: dict[tuple[Value, ...], K] = {}
    for row, a1 in r1.rows.items():
        a2 = r2.rows.get(row)
        value = a1 if a2 is None else semiring.monus(a1, a2)
        if not semiring.is_zero(value):
            rows[row] = value
    return KRelation(r1.schema, rows)


def ra_dupelim(rel: KRelation[K], semiring: MSemiring[K]) -> KRelation[K]:
    """Set semantics: every support row's annotation becomes the semiring's
    dedup value (one, or a symbolic stand-in for one)."""
    return KRelation(rel.schema, {r: semiring.dup_annotation(a) for r, a in rel.rows.items()})


@dataclass(frozen=True)
class BaseAnnotations(Generic[K]):
    """Annotations for base rows, aligned with graphs_rel / quads_rel."""

    graphs: tuple[K, ...]
    quads: tuple[K, ...]


def unit_annotations(db: BaseDb, semiring: MSemiring[K]) -> BaseAnnotations[K]:
    return BaseAnnotations(
        graphs=tuple(semiring.one for _ in db.graphs_rel),
        quads=tuple(semiring.one for _ in db.quads_rel),
    )


def eval_ra(
    expr: RAExpr,
    db: BaseDb,
    semiring: MSemiring[K],
    base: BaseAnnotations[K],
) -> KRelation[K]:
    """Evaluate an expression bottom-up.

    Shared subexpression objects (the translator emits DAGs) are evaluated
    once per call via an identity memo.
    """
    memo: dict[int, KRelation[K]] = {}

    def go(e: RAExpr) -> KRelation[K]:
        key = id(e)
        if key in memo:
            return memo[key]
        if isinstance(e, BaseGraphs):
            result = KRelation.build(
                GRAPHS_SCHEMA, zip((tuple(r) for r in db.graphs_rel), base.graphs), semiring
            )
        elif isinstance(e, BaseQuads):
            result = KRelation.build(
                QUADS_SCHEMA, zip((tuple(r) for r in db.quads_rel), base.quads), semiring
            )
        elif isinstance(e, Select):
            result = ra_select(go(e.input), e.predicate, semiring)
        elif isinstance(e, Project):
            result = ra_project(go(e.input), e.cols, semiring)
        elif isinstance(e, Rename):
            result = ra_rename(go(e.input), e.mapping)
        elif isinstance(e, NatJoin):
            result = ra_natjoin(go(e.left), go(e.right), semiring)
        elif isinstance(e, Union):
            result = ra_union(go(e.left), go(e.right), semiring)
        elif isinstance(e, Diff):
            result = ra_diff(go(e.left), go(e.right), semiring)
        elif isinstance(e, DupElim):
            result = ra_dupelim(go(e.input), semiring)
        else:
            raise TypeError(f"not an algebra expression: {e!r}")
        memo[key] = result
        return result

    return go(expr)


# --- expression dump --------------------------------------------------------


def dump_ra(expr: RAExpr) -> str:
    """Stable indented rendering: operator per line, 2-space indent."""
    return "\n".join(_ra_lines(expr))


def _ra_lines(expr: RAExpr) -> list[str]:
    if isinstance(expr, BaseGraphs):
        return ["graphs"]
    if isinstance(expr, BaseQuads):
        return ["quads"]
    if isinstance(expr, Select):
        return [f"select {render_pred(expr.predicate)}"] + _indent(expr.input)
    if isinstance(expr, Project):
        cols = " ".join(_render_col(c) for c in expr.cols)
        return [f"project [{cols}]"] + _indent(expr.input)
    if isinstance(expr, Rename):
        pairs = " ".join(f"{old}->{new}" for old, new in expr.mapping)
        return [f"rename [{pairs}]"] + _indent(expr.input)
    if isinstance(expr, (NatJoin, Union, Diff)):
        head = {NatJoin: "natjoin", Union: "union", Diff: "diff"}[type(expr)]
        return [head] + _indent(expr.left) + _indent(expr.right)
    if isinstance(expr, DupElim):
        return ["dupelim"] + _indent(expr.input)
    raise TypeError(f"not an algebra expression: {expr!r}")


def _indent(expr: RAExpr) -> list[str]:
    return ["  " + line for line in _ra_lines(expr)]


def _render_value(value: Value) -> str:
    if value is UNB:
        return "unb"
    return str(value)


def _render_col(col: ProjCol) -> str:
    if isinstance(col, Keep):
        return col.attr
    if isinstance(col.value, ConstUnb):
        return f"{col.attr}<-unb"
    if isinstance(col.value, ConstGid):
        return f"{col.attr}<-{col.value.value}"
    return f"{col.attr}<-first({col.value.first},{col.value.second})"


def render_pred(pred: SelPredicate) -> str:
    if isinstance(pred, PredTrue):
        return "true"
    if isinstance(pred, PredFalse):
        return "false"
    if isinstance(pred, AttrEqAttr):
        return f"(= {pred.left} {pred.right})"
    if isinstance(pred, AttrEqConst):
        return f"(= {pred.attr} {_render_value(pred.value)})"
    if isinstance(pred, AttrNeqConst):
        return f"(!= {pred.attr} {_render_value(pred.value)})"
    if isinstance(pred, GidGreater):
        return f"(> {pred.attr} {pred.bound})"
    if isinstance(pred, PredNot):
        return f"(not {render_pred(pred.operand)})"
    if isinstance(pred, (PredAnd, PredOr)):
        head = "and" if isinstance(pred, PredAnd) else "or"
        return f"({head} " + " ".join(render_pred(p) for p in pred.operands) + ")"
    raise TypeError(f"not a selection predicate: {pred!r}")
