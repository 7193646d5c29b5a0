"""RDF terms, triples, datasets, and their encoding as base relations.

A dataset is one default graph plus named graphs in a fixed order. For
evaluation the dataset is flattened into two relations: ``graphs_rel``
enumerates graph ids (``0`` is always the default graph) and ``quads_rel``
holds one row per triple with every term rendered to a canonical text key.
Each base row gets a stable identifier (``g0..gn`` / ``t1..tm``) so that
annotations computed later can point back at concrete triples and graphs.
"""

from __future__ import annotations

from dataclasses import dataclass


class NQuadsSyntaxError(Exception):
    """Malformed N-Quads input; carries 1-based line and column."""

    def __init__(self, line: int, column: int, message: str) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class Iri:
    text: str


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str | None = None
    lang: str | None = None

    def __post_init__(self) -> None:
        # a literal is plain, typed, or language-tagged; never both of the latter
        if self.datatype is not None and self.lang is not None:
            raise ValueError("literal cannot carry both datatype and language tag")


@dataclass(frozen=True)
class Blank:
    label: str


Term = Iri | Literal | Blank


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Iri
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.predicate, Iri):
            raise ValueError("triple predicate must be an IRI")


@dataclass(frozen=True)
class Dataset:
    """Default graph plus named graphs in first-occurrence order.

    Graphs are duplicate-free tuples of triples; tuple order is the input
    order, which later fixes the base identifiers.
    """

    default_graph: tuple[Triple, ...] = ()
    named_graphs: tuple[tuple[Iri, tuple[Triple, ...]], ...] = ()

    def graphs(self) -> list[tuple[int, tuple[Triple, ...]]]:
        """All graphs as (gid, triples); gid 0 is the default graph."""
        out: list[tuple[int, tuple[Triple, ...]]] = [(0, self.default_graph)]
        out.extend((i, g) for i, (_, g) in enumerate(self.named_graphs, start=1))
        return out

    def graph(self, gid: int) -> tuple[Triple, ...]:
        if gid == 0:
            return self.default_graph
        return self.named_graphs[gid - 1][1]

    def gid_of(self, name: Iri) -> int | None:
        """Graph id of a named graph, or None if absent."""
        for i, (iri, _) in enumerate(self.named_graphs, start=1):
            if iri == name:
                return i
        return None


@dataclass(frozen=True)
class BaseDb:
    """Relational encoding of a dataset.

    ``graphs_rel`` rows are (gid, iri_key) with ("" marking the default
    graph); ``quads_rel`` rows are (gid, subject_key, predicate_key,
    object_key). ``graph_ids`` / ``quad_ids`` name the rows positionally.
    """

    graphs_rel: tuple[tuple[int, str], ...]
    quads_rel: tuple[tuple[int, str, str, str], ...]
    graph_ids: tuple[str, ...]
    quad_ids: tuple[str, ...]


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(lexical: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in lexical)


def encode_term(term: Term) -> str:
    """Render a term to its canonical text key.

    The encoding is injective: distinct terms (including literals that differ
    only in datatype or language tag) get distinct keys. No value-level
    normalisation happens, so ``"01"^^xsd:integer`` and ``"1"^^xsd:integer``
    stay distinct.
    """
    if isinstance(term, Iri):
        return f"<{term.text}>"
    if isinstance(term, Literal):
        body = f'"{_escape(term.lexical)}"'
        if term.lang is not None:
            return f"{body}@{term.lang}"
        if term.datatype is not None:
            return f"{body}^^<{term.datatype}>"
        return body
    if isinstance(term, Blank):
        return f"_:{term.label}"
    raise TypeError(f"not an RDF term: {term!r}")


def encode_dataset(dataset: Dataset) -> BaseDb:
    """Flatten a dataset into base relations with stable row identifiers.

    Graph ids follow dataset order (default first), so ``g0`` is always the
    default graph; quad ids ``t1..tm`` follow row order: default-graph
    triples first, then each named graph in turn.
    """
    graphs_rel: list[tuple[int, str]] = [(0, "")]
    graphs_rel.extend(
        (i, encode_term(iri)) for i, (iri, _) in enumerate(dataset.named_graphs, start=1)
    )
    quads_rel: list[tuple[int, str, str, str]] = []
    for gid, triples in dataset.graphs():
        for t in triples:
            quads_rel.append(
                (gid, encode_term(t.subject), encode_term(t.predicate), encode_term(t.object))
            )
    return BaseDb(
        graphs_rel=tuple(graphs_rel),
        quads_rel=tuple(quads_rel),
        graph_ids=tuple(f"g{i}" for i in range(len(graphs_rel))),
        quad_ids=tuple(f"t{i}" for i in range(1, len(quads_rel) + 1)),
    )


# --- N-Quads subset parser -------------------------------------------------
#
# Statements are `<s> <p> <o> .` or `<s> <p> <o> <g> .`, one per line, with
# `#` comments and blank lines allowed. Literals: "lex", "lex"@tag,
# "lex"^^<datatype>. Blank nodes: _:label.


class _LineParser:
    def __init__(self, text: str, line_no: int) -> None:
        self.text = text
        self.line_no = line_no
        self.pos = 0

    def error(self, message: str) -> NQuadsSyntaxError:
        return NQuadsSyntaxError(self.line_no, self.pos + 1, message)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text) or self.text[self.pos] == "#"

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_iri(self) -> Iri:
        start = self.pos
        self.pos += 1  # consume '<'
        while self.peek() not in (">", "", " ", "\t"):
            self.pos += 1
        if self.peek() != ">":
            self.pos = start
            raise self.error("unterminated IRI")
        iri = self.text[start + 1 : self.pos]
        self.pos += 1
        return Iri(iri)

    def parse_literal(self) -> Literal:
        self.pos += 1  # consume '"'
        out: list[str] = []
        while True:
            c = self.peek()
            if c == "":
                raise self.error("unterminated literal")
            if c == '"':
                self.pos += 1
                break
            if c == "\\":
                self.pos += 1
                esc = self.peek()
                unescaped = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}.get(esc)
                if unescaped is None:
                    raise self.error(f"unsupported escape '\\{esc}'")
                out.append(unescaped)
                self.pos += 1
                continue
            out.append(c)
            self.pos += 1
        lexical = "".join(out)
        if self.peek() == "@":
            self.pos += 1
            start = self.pos
            while self.peek().isalnum() or self.peek() == "-":
                self.pos += 1
            if self.pos == start:
                raise self.error("empty language tag")
            return Literal(lexical, lang=self.text[start : self.pos])
        if self.text[self.pos : self.pos + 2] == "^^":
            self.pos += 2
            if self.peek() != "<":
                raise self.error("datatype must be an IRI")
            return Literal(lexical, datatype=self.parse_iri().text)
        return Literal(lexical)

    def parse_blank(self) -> Blank:
        self.pos += 2  # consume '_:'
        start = self.pos
        while self.peek().isalnum() or self.peek() == "_":
            self.pos += 1
        if self.pos == start:
            raise self.error("empty blank node label")
        return Blank(self.text[start : self.pos])

    def parse_term(self) -> Term:
        self.skip_ws()
        c = self.peek()
        if c == "<":
            return self.parse_iri()
        if c == '"':
            return self.parse_literal()
        if self.text[self.pos : self.pos + 2] == "_:":
            return self.parse_blank()
        raise self.error("expected IRI, literal, or blank node")

    def parse_statement(self) -> tuple[Term, Iri, Term, Iri | None]:
        subject = self.parse_term()
        self.skip_ws()
        predicate = self.parse_term()
        if not isinstance(predicate, Iri):
            raise self.error("predicate must be an IRI")
        obj = self.parse_term()
        self.skip_ws()
        graph: Iri | None = None
        if self.peek() == "<":
            graph = self.parse_iri()
        elif self.peek() not in (".", ""):
            raise self.error("graph label must be an IRI")
        self.skip_ws()
        if self.peek() != ".":
            raise self.error("expected '.' at end of statement")
        self.pos += 1
        if not self.at_end():
            raise self.error("unexpected content after '.'")
        return subject, predicate, obj, graph


def _scope_blanks(triple: Triple, scope: int) -> Triple:
    """Prefix blank labels with the graph position.

    Blank nodes are scoped to their graph: the same label in two graphs
    names two distinct nodes. Input labels never contain '.', so the
    prefixed form is unambiguous.
    """

    def scoped(term: Term) -> Term:
        if isinstance(term, Blank):
            return Blank(f"{scope}.{term.label}")
        return term

    if not (isinstance(triple.subject, Blank) or isinstance(triple.object, Blank)):
        return triple
    return Triple(scoped(triple.subject), triple.predicate, scoped(triple.object))


def parse_nquads(text: str) -> Dataset:
    """Parse an N-Quads document (restricted to the subset above).

    Duplicate statements collapse; named graphs keep first-occurrence order.
    Raises :class:`NQuadsSyntaxError` with line/column on malformed input.
    """
    default: list[Triple] = []
    named_order: list[Iri] = []
    named: dict[Iri, list[Triple]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        lp = _LineParser(raw, line_no)
        if lp.at_end():
            continue
        subject, predicate, obj, graph = lp.parse_statement()
        triple = Triple(subject, predicate, obj)
        if graph is None:
            bucket = default
            scope = 0
        else:
            if graph not in named:
                named_order.append(graph)
                named[graph] = []
            bucket = named[graph]
            scope = named_order.index(graph) + 1
        triple = _scope_blanks(triple, scope)
        if triple not in bucket:
            bucket.append(triple)
    return Dataset(
        default_graph=tuple(default),
        named_graphs=tuple((iri, tuple(named[iri])) for iri in named_order),
    )


def render_nquads(dataset: Dataset) -> str:
    """Debug serializer; inverse of :func:`parse_nquads` on its outputs."""
    lines: list[str] = []
    for gid, triples in dataset.graphs():
        suffix = "" if gid == 0 else f" {encode_term(dataset.named_graphs[gid - 1][0])}"
        for t in triples:
            parts = " ".join(_render_term(term, gid) for term in (t.subject, t.predicate, t.object))
            lines.append(f"{parts}{suffix} .")
    return "".join(line + "\n" for line in lines)


def _render_term(term: Term, gid: int) -> str:
    if isinstance(term, Blank) and term.label.startswith(f"{gid}."):
        return f"_:{term.label[len(str(gid)) + 1 :]}"
    return encode_term(term)
