"""Provenance runs, trust specialisation, count checking."""

from __future__ import annotations

from sparqlprov.parser import parse_query
from sparqlprov.pipeline import apply_trust, count_check, run_provenance
from sparqlprov.rdf import parse_nquads
from sparqlprov.semiring import render

from .conftest import ACCOUNTS_DATA, ACCOUNTS_DATA_NO_HOMEPAGE, ACCOUNTS_QUERY


def _run(data: str, query: str):
    return run_provenance(parse_query(query), parse_nquads(data))


def test_run_provenance_accounts(accounts_data, accounts_query):
    result = _run(accounts_data, accounts_query)
    assert result.columns == ("acc", "home", "who")
    assert [(r.values, render(r.annotation)) for r in result.rows] == [
        (
            ("<http://bank>", "<http://bank/yourmoney>", "<http://people/david>"),
            "g0*t1*t3",
        ),
        (("<http://bank>", None, "<http://people/david>"), "g0*t1*(1-t1*t3)"),
        (("<http://games>", None, "<http://people/felix>"), "g0*t2"),
    ]


def test_run_provenance_counterfactual_data():
    result = _run(ACCOUNTS_DATA_NO_HOMEPAGE, ACCOUNTS_QUERY)
    assert [(r.values, render(r.annotation)) for r in result.rows] == [
        (("<http://bank>", None, "<http://people/david>"), "g0*t1"),
        (("<http://games>", None, "<http://people/felix>"), "g0*t2"),
    ]


def test_apply_trust_scenarios(accounts_data, accounts_query):
    result = _run(accounts_data, accounts_query)
    assert apply_trust(result) == [True, False, True]
    assert apply_trust(result, {"t3": False}) == [False, True, True]
    assert apply_trust(result, {"g0": False}) == [False, False, False]
    # distrust by default; explicit trust in t2 and g0 revives only row 3
    assert apply_trust(result, {"t2": True, "g0": True}, default=False) == [
        False,
        False,
        True,
    ]


def test_count_check_accounts(accounts_data, accounts_query):
    report = count_check(parse_query(accounts_query), parse_nquads(accounts_data))
    assert report.ok
    assert report.columns == ("acc", "home", "who")
    # the phantom row of the symbolic table has count 0 on both sides
    assert [(r.values, r.engine_count, r.reference_count) for r in report.rows] == [
        (("<http://bank>", "<http://bank/yourmoney>", "<http://people/david>"), 1, 1),
        (("<http://games>", None, "<http://people/felix>"), 1, 1),
    ]


def test_count_check_projection_merges():
    report = count_check(
        parse_query("SELECT ?a WHERE { ?a <http://p> ?b }"),
        parse_nquads(
            "<http://s> <http://p> <http://o> .\n<http://s> <http://p> <http://z> .\n"
        ),
    )
    assert report.ok
    assert [(r.values, r.engine_count) for r in report.rows] == [(("<http://s>",), 2)]


def test_empty_query_annotation():
    result = _run("<http://s> <http://p> <http://o> .\n", "SELECT * WHERE { }")
    assert result.columns == ()
    assert len(result.rows) == 1
    assert result.rows[0].values == ()
    assert render(result.rows[0].annotation) == "g0*g0"
