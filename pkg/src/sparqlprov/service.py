"""HTTP facade over the query engine.

Endpoints:

* ``POST /run`` — evaluate a query over an N-Quads dataset and return one
  row per solution, carrying a provenance expression (``free``), a trust
  verdict (``bool``), or a multiplicity (``nat``).
* ``POST /parse`` — parse a query and return a rendering of its syntax tree.
* ``POST /translate`` — compile a query and return a rendering of the
  algebra expression it evaluates.
* ``POST /check`` — compare engine multiplicities against the reference
  evaluator, row by row.
* ``GET /health`` — liveness probe.

Malformed input (bad N-Quads, bad query syntax, unknown prefix, projection
of a variable the pattern cannot bind) is reported as a 400 response whose
``detail`` carries the error class name and message.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .parser import QuerySyntaxError, UnknownPrefixError, parse_query
from .parser import dump_query as _dump_query
from .patterns import ProjectionError, Query
from .pipeline import apply_trust, count_check, run_counting, run_provenance
from .rdf import Dataset, NQuadsSyntaxError, parse_nquads
from .semiring import render
from .translate import translate_query
from .krel import dump_ra

app = FastAPI(title="sparqlprov", version=__version__)

_USER_ERRORS = (NQuadsSyntaxError, QuerySyntaxError, UnknownPrefixError, ProjectionError)


class RunRequest(BaseModel):
    data: str = ""
    query: str
    semiring: Literal["free", "bool", "nat"] = "free"
    trust: dict[str, bool] = Field(default_factory=dict)
    trust_default: bool = True


class RunRow(BaseModel):
    bindings: dict[str, str | None]
    provenance: str | None = None
    trusted: bool | None = None
    count: int | None = None


class RunResponse(BaseModel):
    vars: list[str]
    rows: list[RunRow]


class QueryRequest(BaseModel):
    query: str


class ParseResponse(BaseModel):
    ast: str


class TranslateResponse(BaseModel):
    algebra: str


class CheckRequest(BaseModel):
    data: str = ""
    query: str


class CheckResponseRow(BaseModel):
    bindings: dict[str, str | None]
    engine_count: int
    reference_count: int


class CheckResponse(BaseModel):
    ok: bool
    vars: list[str]
    rows: list[CheckResponseRow]


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(
        status_code=400,
        detail={"error": type(exc).__name__, "message": str(exc)},
    )


def _parse_query(text: str) -> Query:
    try:
        return parse_query(text)
    except _USER_ERRORS as exc:
        raise _bad_request(exc) from exc


def _parse_data(text: str) -> Dataset:
    try:
        return parse_nquads(text)
    except NQuadsSyntaxError as exc:
        raise _bad_request(exc) from exc


def _bindings(columns: tuple[str, ...], values: tuple[str | None, ...]) -> dict[str, str | None]:
    return dict(zip(columns, values))


@app.post("/run", response_model=RunResponse, response_model_exclude_none=True)
def run(req: RunRequest) -> RunResponse:
    query = _parse_query(req.query)
    dataset = _parse_data(req.data)
    try:
        if req.semiring == "nat":
            columns, counted = run_counting(query, dataset)
            rows = [
                RunRow(bindings=_bindings(columns, values), count=count)
                for values, count in counted
            ]
            return RunResponse(vars=list(columns), rows=rows)
        result = run_provenance(query, dataset)
    except _USER_ERRORS as exc:
        raise _bad_request(exc) from exc
    if req.semiring == "bool":
        verdicts = apply_trust(result, req.trust, default=req.trust_default)
        rows = [
            RunRow(
                bindings=_bindings(result.columns, row.values),
                provenance=render(row.annotation),
                trusted=verdict,
            )
            for row, verdict in zip(result.rows, verdicts)
        ]
    else:
        rows = [
            RunRow(
                bindings=_bindings(result.columns, row.values),
                provenance=render(row.annotation),
            )
            for row in result.rows
        ]
    return RunResponse(vars=list(result.columns), rows=rows)


@app.post("/parse", response_model=ParseResponse)
def parse(req: QueryRequest) -> ParseResponse:
    query = _parse_query(req.query)
    return ParseResponse(ast=_dump_query(query))


@app.post("/translate", response_model=TranslateResponse)
def translate(req: QueryRequest) -> TranslateResponse:
    query = _parse_query(req.query)
    try:
        expr = translate_query(query)
    except _USER_ERRORS as exc:
        raise _bad_request(exc) from exc
    return TranslateResponse(algebra=dump_ra(expr))


@app.post("/check", response_model=CheckResponse)
def check(req: CheckRequest) -> CheckResponse:
    query = _parse_query(req.query)
    dataset = _parse_data(req.data)
    try:
        report = count_check(query, dataset)
    except _USER_ERRORS as exc:
        raise _bad_request(exc) from exc
    rows = [
        CheckResponseRow(
            bindings=_bindings(report.columns, row.values),
            engine_count=row.engine_count,
            reference_count=row.reference_count,
        )
        for row in report.rows
    ]
    return CheckResponse(ok=report.ok, vars=list(report.columns), rows=rows)


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok", "version": __version__}
