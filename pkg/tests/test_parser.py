"""Query grammar, group desugaring, and the stable AST dump."""

from __future__ import annotations

import pytest

from sparqlprov import filters as flt
from sparqlprov.parser import (
    QuerySyntaxError,
    UnknownPrefixError,
    dump_query,
    parse_query,
)
from sparqlprov.patterns import (
    And,
    Empty,
    Filter,
    Graph,
    Minus,
    Optional,
    ProjectionError,
    TriplePattern,
    Union,
    Variable,
    var_of,
)
from sparqlprov.rdf import Iri, Literal

from .conftest import ACCOUNTS_QUERY

FOAF = "http://xmlns.com/foaf/0.1/"


def v(name: str) -> Variable:
    return Variable(name)


def tp(s, p, o) -> TriplePattern:
    return TriplePattern(s, p, o)


def test_parse_accounts_query():
    q = parse_query(ACCOUNTS_QUERY)
    assert q.projection is None
    assert q.pattern == Optional(
        tp(v("who"), Iri(FOAF + "account"), v("acc")),
        tp(v("acc"), Iri(FOAF + "accountServiceHomepage"), v("home")),
        None,
    )


def test_parse_prefix_without_colon():
    # the declaration form 'PREFIX foaf <iri>' is accepted too
    q = parse_query(
        f"PREFIX foaf <{FOAF}> SELECT * WHERE {{ ?who foaf:account ?acc }}"
    )
    assert q.pattern == tp(v("who"), Iri(FOAF + "account"), v("acc"))


def test_parse_triple_run_folds_with_unit():
    q = parse_query("SELECT * WHERE { ?a <http://p> ?b . ?b <http://p> ?c . ?c <http://p> ?d }")
    t1 = tp(v("a"), Iri("http://p"), v("b"))
    t2 = tp(v("b"), Iri("http://p"), v("c"))
    t3 = tp(v("c"), Iri("http://p"), v("d"))
    assert q.pattern == And(Empty(), And(t1, And(t2, t3)))


def test_parse_single_triple_stays_bare():
    q = parse_query("SELECT * WHERE { ?a <http://p> ?b }")
    assert q.pattern == tp(v("a"), Iri("http://p"), v("b"))


def test_parse_empty_group():
    q = parse_query("SELECT * WHERE { }")
    assert q.pattern == Empty()


def test_parse_union_left_fold():
    q = parse_query(
        "SELECT * WHERE { { ?a <http://p> ?b } UNION { ?a <http://q> ?b } UNION { ?a <http://r> ?b } }"
    )
    p1 = tp(v("a"), Iri("http://p"), v("b"))
    p2 = tp(v("a"), Iri("http://q"), v("b"))
    p3 = tp(v("a"), Iri("http://r"), v("b"))
    assert q.pattern == Union(Union(p1, p2), p3)


def test_parse_optional_chain_left_fold():
    q = parse_query(
        "SELECT * WHERE { ?a <http://p> ?b OPTIONAL { ?b <http://q> ?c } OPTIONAL { ?b <http://r> ?d } }"
    )
    base = tp(v("a"), Iri("http://p"), v("b"))
    inner1 = Optional(base, tp(v("b"), Iri("http://q"), v("c")), None)
    assert q.pattern == Optional(inner1, tp(v("b"), Iri("http://r"), v("d")), None)


def test_parse_optional_with_trailing_filter():
    q = parse_query(
        "SELECT * WHERE { ?a <http://p> ?b OPTIONAL { ?b <http://q> ?c FILTER (?c != <http://x>) } }"
    )
    assert q.pattern == Optional(
        tp(v("a"), Iri("http://p"), v("b")),
        tp(v("b"), Iri("http://q"), v("c")),
        flt.Neq(v("c"), Iri("http://x")),
    )


def test_parse_leading_optional_attaches_to_unit():
    q = parse_query("SELECT * WHERE { OPTIONAL { ?a <http://p> ?b } }")
    assert q.pattern == Optional(Empty(), tp(v("a"), Iri("http://p"), v("b")), None)


def test_parse_minus():
    q = parse_query("SELECT * WHERE { ?a <http://p> ?b MINUS { ?a <http://q> ?b } }")
    assert q.pattern == Minus(
        tp(v("a"), Iri("http://p"), v("b")), tp(v("a"), Iri("http://q"), v("b"))
    )


def test_parse_graph_forms():
    q = parse_query("SELECT * WHERE { GRAPH <http://g> { ?a <http://p> ?b } }")
    assert q.pattern == Graph(Iri("http://g"), tp(v("a"), Iri("http://p"), v("b")))
    q2 = parse_query("SELECT * WHERE { GRAPH ?g { ?a <http://p> ?b } }")
    assert q2.pattern == Graph(v("g"), tp(v("a"), Iri("http://p"), v("b")))


def test_parse_filters_apply_to_whole_group_last():
    q = parse_query(
        "SELECT * WHERE { ?a <http://p> ?b FILTER BOUND(?c) OPTIONAL { ?a <http://q> ?c } }"
    )
    inner = Optional(
        tp(v("a"), Iri("http://p"), v("b")), tp(v("a"), Iri("http://q"), v("c")), None
    )
    assert q.pattern == Filter(inner, flt.Bound(v("c")))


def test_parse_filter_expressions():
    q = parse_query(
        "SELECT * WHERE { ?a <http://p> ?b "
        'FILTER (!(?a = <http://x>) && ?b != "lit"@en || true) }'
    )
    cond = q.pattern.condition
    assert cond == flt.Or(
        flt.And(
            flt.Not(flt.Eq(v("a"), Iri("http://x"))),
            flt.Neq(v("b"), Literal("lit", lang="en")),
        ),
        flt.TRUE,
    )


def test_parse_exists_forms():
    q = parse_query(
        "SELECT * WHERE { ?a <http://p> ?b FILTER EXISTS { ?b <http://q> ?c } }"
    )
    assert q.pattern.condition == flt.Exists(tp(v("b"), Iri("http://q"), v("c")))
    q2 = parse_query(
        "SELECT * WHERE { ?a <http://p> ?b FILTER NOT EXISTS { ?b <http://q> ?c } }"
    )
    assert q2.pattern.condition == flt.NotExists(tp(v("b"), Iri("http://q"), v("c")))


def test_parse_explicit_projection():
    q = parse_query("SELECT ?b ?a WHERE { ?a <http://p> ?b }")
    assert q.projection == (v("b"), v("a"))


def test_projection_error_for_out_of_scope_variable():
    with pytest.raises(ProjectionError):
        parse_query("SELECT ?zzz WHERE { ?a <http://p> ?b }")
    # MINUS right side is not in scope
    with pytest.raises(ProjectionError):
        parse_query("SELECT ?c WHERE { ?a <http://p> ?b MINUS { ?a <http://q> ?c } }")


def test_unknown_prefix_error():
    with pytest.raises(UnknownPrefixError) as exc:
        parse_query("SELECT * WHERE { ?a foaf:name ?b }")
    assert exc.value.prefix == "foaf"


@pytest.mark.parametrize(
    "text",
    [
        "SELECT WHERE { ?a <http://p> ?b }",
        "SELECT * { ?a <http://p> ?b }",
        "SELECT * WHERE { ?a <http://p> }",
        "SELECT * WHERE { ?a <http://p> ?b",
        "SELECT * WHERE { ?a <http://p> ?b } trailing",
        "SELECT * WHERE { FILTER (?a =) }",
        "SELECT * WHERE { FILTER (?a) }",
        "SELECT * WHERE { ?a <http://p ?b }",
        "SELECT * WHERE { { ?a <http://p> ?b } UNION ?c }",
    ],
)
def test_syntax_errors_carry_position(text):
    with pytest.raises(QuerySyntaxError) as exc:
        parse_query(text)
    assert 0 <= exc.value.position <= len(text)


def test_var_of_examples():
    q = parse_query(
        "SELECT * WHERE { { ?a <http://p> ?b } UNION { ?c <http://p> ?a } }"
    )
    assert var_of(q.pattern) == (v("a"), v("b"), v("c"))
    q2 = parse_query("SELECT * WHERE { GRAPH ?g { ?a <http://p> ?b } }")
    assert var_of(q2.pattern) == (v("a"), v("b"), v("g"))


def test_dump_query_stable_format(accounts_query):
    q = parse_query(accounts_query)
    assert dump_query(q) == (
        "(query\n"
        "  (select *)\n"
        "  (optional\n"
        f"    (triple ?who <{FOAF}account> ?acc)\n"
        f"    (triple ?acc <{FOAF}accountServiceHomepage> ?home)))"
    )


def test_dump_query_with_filter_and_exists():
    q = parse_query(
        "SELECT ?a WHERE { ?a <http://p> ?b FILTER (BOUND(?b) && NOT EXISTS { ?b <http://q> ?a }) }"
    )
    assert dump_query(q) == (
        "(query\n"
        "  (select ?a)\n"
        "  (filter\n"
        "    (triple ?a <http://p> ?b)\n"
        "    (&&\n"
        "      (bound ?b)\n"
        "      (not-exists\n"
        "        (triple ?b <http://q> ?a)))))"
    )
