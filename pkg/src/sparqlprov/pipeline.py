"""End-to-end runs: dataset + query to annotated results.

``run_provenance`` evaluates the translated query in the free m-semiring
with one fresh identifier per base row, so every result row carries a
symbolic derivation. ``apply_trust`` specialises those derivations to the
boolean semiring under a trust assignment; ``count_check`` replays the same
query in the counting semiring and compares multiplicities against the
reference evaluator, which ties the two evaluation routes together.
"""

from __future__ import annotations

from dataclasses import dataclass

from .krel import UNB, BaseAnnotations, eval_ra, unit_annotations
from .patterns import Query, projected_variables
from .rdf import BaseDb, Dataset, encode_dataset, encode_term
from .refeval import evaluate
from .semiring import (
    Id,
    ProvTerm,
    bool_semiring,
    free_msemiring,
    hom_eval,
    identifiers,
    nat_semiring,
)
from .translate import translate_query


@dataclass(frozen=True)
class ResultRow:
    values: tuple[str | None, ...]  # encoded terms; None where unbound
    annotation: ProvTerm


@dataclass(frozen=True)
class AnnotatedResult:
    columns: tuple[str, ...]  # variable names, no sigil
    rows: tuple[ResultRow, ...]


def free_annotations(db: BaseDb) -> BaseAnnotations[ProvTerm]:
    """One identifier per base row: g0..gn for graphs, t1..tm for quads."""
    return BaseAnnotations(
        graphs=tuple(Id(name) for name in db.graph_ids),
        quads=tuple(Id(name) for name in db.quad_ids),
    )


def _row_sort_key(row: ResultRow) -> tuple:
    # bound cells order lexicographically and precede unbound ones
    return tuple((1, "") if v is None else (0, v) for v in row.values)


def run_provenance(query: Query, dataset: Dataset) -> AnnotatedResult:
    """Evaluate with symbolic annotations; rows sorted by their values."""
    db = encode_dataset(dataset)
    expr = translate_query(query)
    rel = eval_ra(expr, db, free_msemiring, free_annotations(db))
    rows = [
        ResultRow(
            values=tuple(None if v is UNB else v for v in row),
            annotation=annotation,
        )
        for row, annotation in rel.rows.items()
    ]
    rows.sort(key=_row_sort_key)
    columns = tuple(v.name for v in projected_variables(query))
    return AnnotatedResult(columns=columns, rows=tuple(rows))


def apply_trust(
    result: AnnotatedResult,
    trust: dict[str, bool] | None = None,
    default: bool = True,
) -> list[bool]:
    """Specialise each row's derivation to a trust verdict.

    ``trust`` maps base identifiers (t1, g0, ...) to flags; identifiers not
    mentioned get the default. A row ends up trusted exactly when its
    derivation survives with every distrusted base row deleted.
    """
    trust = trust or {}
    verdicts = []
    for row in result.rows:
        assignment = {
            name: trust.get(name, default) for name in set(identifiers(row.annotation))
        }
        verdicts.append(hom_eval(row.annotation, bool_semiring, assignment))
    return verdicts


def run_counting(query: Query, dataset: Dataset) -> tuple[tuple[str, ...], list[tuple[tuple[str | None, ...], int]]]:
    """Evaluate in the counting semiring: (columns, sorted (values, count))."""
    db = encode_dataset(dataset)
    expr = translate_query(query)
    rel = eval_ra(expr, db, nat_semiring, unit_annotations(db, nat_semiring))
    rows = [
        (tuple(None if v is UNB else v for v in row), count)
        for row, count in rel.rows.items()
    ]
    rows.sort(key=lambda rc: tuple((1, "") if v is None else (0, v) for v in rc[0]))
    return tuple(v.name for v in projected_variables(query)), rows


@dataclass(frozen=True)
class CheckRow:
    values: tuple[str | None, ...]
    engine_count: int
    reference_count: int


@dataclass(frozen=True)
class CheckReport:
    columns: tuple[str, ...]
    rows: tuple[CheckRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.engine_count == r.reference_count for r in self.rows)


def count_check(query: Query, dataset: Dataset) -> CheckReport:
    """Compare engine multiplicities against the reference evaluator."""
    db = encode_dataset(dataset)
    expr = translate_query(query)
    rel = eval_ra(expr, db, nat_semiring, unit_annotations(db, nat_semiring))
    engine: dict[tuple[str | None, ...], int] = {
        tuple(None if v is UNB else v for v in row): count
        for row, count in rel.rows.items()
    }
    variables = projected_variables(query)
    reference: dict[tuple[str | None, ...], int] = {}
    for mapping, count in evaluate(query.pattern, dataset).items():
        key = tuple(
            encode_term(term) if (term := mapping.get(v.name)) is not None else None
            for v in variables
        )
        reference[key] = reference.get(key, 0) + count
    keys = sorted(
        set(engine) | set(reference),
        key=lambda row: tuple((1, "") if v is None else (0, v) for v in row),
    )
    rows = tuple(
        CheckRow(values=key, engine_count=engine.get(key, 0), reference_count=reference.get(key, 0))
        for key in keys
    )
    return CheckReport(columns=tuple(v.name for v in variables), rows=rows)
