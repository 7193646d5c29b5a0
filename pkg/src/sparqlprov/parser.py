"""SPARQL parser for the supported fragment.

Grammar (case-insensitive keywords)::

    query    := prefix* SELECT ('*' | var+) WHERE group
    prefix   := PREFIX (name ':' | name) <iri>
    group    := '{' element* '}'
    element  := triple ('.' triple)* '.'?
              | OPTIONAL group | MINUS group | GRAPH (var | iri) group
              | group (UNION group)*
              | FILTER expr
    expr     := or-expression over '!', '&&', '||', comparisons ('=', '!='),
                BOUND(var), EXISTS group, NOT EXISTS group, true, false

A group desugars to the binary pattern algebra: runs of triples fold into
And-chains, OPTIONAL / MINUS attach to everything accumulated so far (left
fold), and FILTERs apply to the whole group last. An OPTIONAL whose inner
group ends in a FILTER keeps that condition on the Optional node itself,
because the pair evaluates as one construct.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from . import filters as flt
from .patterns import (
    And,
    Empty,
    Filter,
    Graph,
    GraphPattern,
    Minus,
    Optional,
    Query,
    TermOrVar,
    TriplePattern,
    Union,
    Variable,
    projected_variables,
)
from .rdf import Iri, Literal, Term, encode_term


class QuerySyntaxError(Exception):
    """Malformed query text; carries the 0-based character offset."""

    def __init__(self, position: int, message: str) -> None:
        super().__init__(f"at offset {position}: {message}")
        self.position = position
        self.message = message


class UnknownPrefixError(Exception):
    """A prefixed name used a prefix with no PREFIX declaration."""

    def __init__(self, prefix: str, position: int) -> None:
        super().__init__(f"at offset {position}: unknown prefix '{prefix}:'")
        self.prefix = prefix
        self.position = position


@dataclass(frozen=True)
class _Token:
    kind: str  # IRI PNAME VAR STRING WORD PUNCT EOF
    value: Any
    pos: int


_KEYWORDS = {"prefix", "select", "where", "optional", "minus", "filter", "union", "graph",
             "bound", "exists", "not", "true", "false"}


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = i
        if c == "<":
            i += 1
            while i < n and text[i] not in "> \t\r\n":
                i += 1
            if i >= n or text[i] != ">":
                raise QuerySyntaxError(start, "unterminated IRI")
            tokens.append(_Token("IRI", text[start + 1 : i], start))
            i += 1
            continue
        if c == '"':
            literal, i = _scan_literal(text, i)
            tokens.append(_Token("STRING", literal, start))
            continue
        if c == "?":
            i += 1
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i:
                raise QuerySyntaxError(start, "empty variable name")
            tokens.append(_Token("VAR", text[i:j], start))
            i = j
            continue
        if c in "{}().*=":
            tokens.append(_Token("PUNCT", c, start))
            i += 1
            continue
        if c == "!":
            if text[i : i + 2] == "!=":
                tokens.append(_Token("PUNCT", "!=", start))
                i += 2
            else:
                tokens.append(_Token("PUNCT", "!", start))
                i += 1
            continue
        if c in "&|":
            if text[i : i + 2] in ("&&", "||"):
                tokens.append(_Token("PUNCT", text[i : i + 2], start))
                i += 2
                continue
            raise QuerySyntaxError(start, f"unexpected character {c!r}")
        if c.isalpha() or c == "_" or c == ":":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_-"):
                j += 1
            word = text[i:j]
            if j < n and text[j] == ":":
                # prefixed name (the local part may be empty, as in 'foaf:')
                j += 1
                k = j
                while k < n and (text[k].isalnum() or text[k] in "_-"):
                    k += 1
                tokens.append(_Token("PNAME", (word, text[j:k]), start))
                i = k
                continue
            tokens.append(_Token("WORD", word, start))
            i = j
            continue
        raise QuerySyntaxError(start, f"unexpected character {c!r}")
    tokens.append(_Token("EOF", None, n))
    return tokens


def _scan_literal(text: str, i: int) -> tuple[Literal, int]:
    start = i
    n = len(text)
    i += 1
    out: list[str] = []
    while True:
        if i >= n:
            raise QuerySyntaxError(start, "unterminated literal")
        c = text[i]
        if c == '"':
            i += 1
            break
        if c == "\\":
            esc = text[i + 1 : i + 2]
            unescaped = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}.get(esc)
            if unescaped is None:
                raise QuerySyntaxError(i, f"unsupported escape '\\{esc}'")
            out.append(unescaped)
            i += 2
            continue
        out.append(c)
        i += 1
    lexical = "".join(out)
    if text[i : i + 1] == "@":
        i += 1
        j = i
        while j < n and (text[j].isalnum() or text[j] == "-"):
            j += 1
        if j == i:
            raise QuerySyntaxError(i, "empty language tag")
        return Literal(lexical, lang=text[i:j]), j
    if text[i : i + 2] == "^^":
        i += 2
        if text[i : i + 1] != "<":
            raise QuerySyntaxError(i, "datatype must be an IRI")
        j = i + 1
        while j < n and text[j] not in "> \t\r\n":
            j += 1
        if j >= n or text[j] != ">":
            raise QuerySyntaxError(i, "unterminated IRI")
        return Literal(lexical, datatype=text[i + 1 : j]), j + 1
    return Literal(lexical), i


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at_word(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "WORD" and tok.value.lower() == word

    def at_punct(self, punct: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.value == punct

    def expect_word(self, word: str) -> _Token:
        if not self.at_word(word):
            raise QuerySyntaxError(self.peek().pos, f"expected '{word.upper()}'")
        return self.advance()

    def expect_punct(self, punct: str) -> _Token:
        if not self.at_punct(punct):
            raise QuerySyntaxError(self.peek().pos, f"expected '{punct}'")
        return self.advance()

    # --- entry point ---------------------------------------------------

    def parse_query(self) -> Query:
        while self.at_word("prefix"):
            self.advance()
            tok = self.advance()
            if tok.kind == "PNAME" and tok.value[1] == "":
                name = tok.value[0]
            elif tok.kind == "WORD":  # 'PREFIX foaf <...>': colon-less form
                name = tok.value
            else:
                raise QuerySyntaxError(tok.pos, "expected prefix name")
            iri_tok = self.advance()
            if iri_tok.kind != "IRI":
                raise QuerySyntaxError(iri_tok.pos, "expected IRI in prefix declaration")
            self.prefixes[name] = iri_tok.value
        self.expect_word("select")
        projection: tuple[Variable, ...] | None
        if self.at_punct("*"):
            self.advance()
            projection = None
        else:
            names: list[Variable] = []
            while self.peek().kind == "VAR":
                names.append(Variable(self.advance().value))
            if not names:
                raise QuerySyntaxError(self.peek().pos, "expected '*' or variables after SELECT")
            projection = tuple(names)
        self.expect_word("where")
        pattern = self.parse_group()
        tok = self.peek()
        if tok.kind != "EOF":
            raise QuerySyntaxError(tok.pos, "unexpected content after query")
        query = Query(tuple(self.prefixes.items()), projection, pattern)
        projected_variables(query)  # raises ProjectionError on out-of-scope names
        return query

    # --- groups ----------------------------------------------------------

    def parse_group(self) -> GraphPattern:
        self.expect_punct("{")
        items: list[tuple[str, Any]] = []
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind in ("VAR", "IRI", "PNAME", "STRING"):
                items.append(("triples", self.parse_triple_run()))
                continue  # the run consumed any separating dots itself
            if self.at_word("optional"):
                self.advance()
                items.append(("optional", self.parse_group()))
            elif self.at_word("minus"):
                self.advance()
                items.append(("minus", self.parse_group()))
            elif self.at_word("filter"):
                self.advance()
                items.append(("filter", self.parse_expression()))
            elif self.at_word("graph"):
                self.advance()
                name = self.parse_graph_name()
                items.append(("pattern", Graph(name, self.parse_group())))
            elif self.at_punct("{"):
                sub = self.parse_group()
                while self.at_word("union"):
                    self.advance()
                    sub = Union(sub, self.parse_group())
                items.append(("pattern", sub))
            else:
                raise QuerySyntaxError(tok.pos, "expected graph pattern element")
            if self.at_punct("."):  # optional separator after a braced element
                self.advance()
        self.advance()  # '}'
        return desugar_group(items)

    def parse_triple_run(self) -> list[TriplePattern]:
        run = [self.parse_triple()]
        while self.at_punct("."):
            self.advance()
            tok = self.peek()
            if tok.kind in ("VAR", "IRI", "PNAME", "STRING"):
                run.append(self.parse_triple())
            else:
                break  # trailing dot
        return run

    def parse_triple(self) -> TriplePattern:
        subject = self.parse_term_or_var()
        predicate = self.parse_term_or_var()
        if not isinstance(predicate, (Variable, Iri)):
            raise QuerySyntaxError(self.peek().pos, "predicate must be a variable or IRI")
        obj = self.parse_term_or_var()
        return TriplePattern(subject, predicate, obj)

    def parse_graph_name(self) -> Iri | Variable:
        tok = self.peek()
        name = self.parse_term_or_var()
        if not isinstance(name, (Iri, Variable)):
            raise QuerySyntaxError(tok.pos, "graph name must be a variable or IRI")
        return name

    def parse_term_or_var(self) -> TermOrVar:
        tok = self.advance()
        if tok.kind == "VAR":
            return Variable(tok.value)
        if tok.kind == "IRI":
            return Iri(tok.value)
        if tok.kind == "STRING":
            return tok.value
        if tok.kind == "PNAME":
            prefix, local = tok.value
            if prefix not in self.prefixes:
                raise UnknownPrefixError(prefix, tok.pos)
            return Iri(self.prefixes[prefix] + local)
        raise QuerySyntaxError(tok.pos, "expected RDF term or variable")

    # --- filter expressions -----------------------------------------------

    def parse_expression(self) -> flt.FilterExpr:
        expr = self.parse_and_expr()
        while self.at_punct("||"):
            self.advance()
            expr = flt.Or(expr, self.parse_and_expr())
        return expr

    def parse_and_expr(self) -> flt.FilterExpr:
        expr = self.parse_unary()
        while self.at_punct("&&"):
            self.advance()
            expr = flt.And(expr, self.parse_unary())
        return expr

    def parse_unary(self) -> flt.FilterExpr:
        if self.at_punct("!"):
            self.advance()
            return flt.Not(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> flt.FilterExpr:
        tok = self.peek()
        if self.at_punct("("):
            self.advance()
            expr = self.parse_expression()
            self.expect_punct(")")
            return expr
        if self.at_word("bound"):
            self.advance()
            self.expect_punct("(")
            var_tok = self.advance()
            if var_tok.kind != "VAR":
                raise QuerySyntaxError(var_tok.pos, "BOUND takes a variable")
            self.expect_punct(")")
            return flt.Bound(Variable(var_tok.value))
        if self.at_word("exists"):
            self.advance()
            return flt.Exists(self.parse_group())
        if self.at_word("not"):
            self.advance()
            self.expect_word("exists")
            return flt.NotExists(self.parse_group())
        if self.at_word("true"):
            self.advance()
            return flt.TRUE
        if self.at_word("false"):
            self.advance()
            return flt.FALSE
        if tok.kind in ("VAR", "IRI", "PNAME", "STRING"):
            left = self.parse_term_or_var()
            op = self.peek()
            if self.at_punct("="):
                self.advance()
                return flt.Eq(left, self.parse_term_or_var())
            if self.at_punct("!="):
                self.advance()
                return flt.Neq(left, self.parse_term_or_var())
            raise QuerySyntaxError(op.pos, "expected '=' or '!=' after term")
        raise QuerySyntaxError(tok.pos, "expected filter expression")


def desugar_group(items: list[tuple[str, Any]]) -> GraphPattern:
    """Fold parsed group elements into the binary pattern algebra.

    Runs of n >= 2 triples become ``And((), t1 And t2 ...)`` (right-nested);
    a single triple stays bare. OPTIONAL and MINUS attach to the pattern
    accumulated so far, an empty prefix meaning the unit pattern. FILTERs
    wrap the finished group in source order.
    """
    current: GraphPattern | None = None
    deferred: list[flt.FilterExpr] = []
    for kind, payload in items:
        if kind == "filter":
            deferred.append(payload)
            continue
        if kind == "triples":
            piece = _fold_run(payload)
            current = piece if current is None else And(current, piece)
        elif kind == "pattern":
            current = payload if current is None else And(current, payload)
        elif kind == "optional":
            inner, condition = _split_trailing_filter(payload)
            current = Optional(current if current is not None else Empty(), inner, condition)
        elif kind == "minus":
            current = Minus(current if current is not None else Empty(), payload)
        else:
            raise ValueError(f"unknown group element kind {kind!r}")
    if current is None:
        current = Empty()
    for condition in deferred:
        current = Filter(current, condition)
    return current


def _fold_run(run: list[TriplePattern]) -> GraphPattern:
    if len(run) == 1:
        return run[0]
    folded: GraphPattern = run[-1]
    for tp in reversed(run[:-1]):
        folded = And(tp, folded)
    return And(Empty(), folded)


def _split_trailing_filter(pattern: GraphPattern) -> tuple[GraphPattern, flt.FilterExpr | None]:
    if isinstance(pattern, Filter):
        return pattern.pattern, pattern.condition
    return pattern, None


def parse_query(text: str) -> Query:
    """Parse a query; raises QuerySyntaxError / UnknownPrefixError /
    ProjectionError."""
    return _Parser(text).parse_query()


# --- stable AST dump ---------------------------------------------------


def dump_query(query: Query) -> str:
    """S-expression dump, one composite node per line, 2-space indent."""
    if query.projection is None:
        select = "(select *)"
    else:
        select = "(select " + " ".join(str(v) for v in query.projection) + ")"
    lines = ["(query", "  " + select]
    lines.extend("  " + line for line in _pattern_lines(query.pattern))
    lines[-1] += ")"
    return "\n".join(lines)


def dump_pattern(pattern: GraphPattern) -> str:
    return "\n".join(_pattern_lines(pattern))


def _atom(term: TermOrVar) -> str:
    if isinstance(term, Variable):
        return str(term)
    return encode_term(term)


def _pattern_lines(pattern: GraphPattern) -> list[str]:
    if isinstance(pattern, Empty):
        return ["(empty)"]
    if isinstance(pattern, TriplePattern):
        return [f"(triple {_atom(pattern.subject)} {_atom(pattern.predicate)} {_atom(pattern.object)})"]
    if isinstance(pattern, (And, Union, Minus)):
        head = {And: "and", Union: "union", Minus: "minus"}[type(pattern)]
        return _nest(head, [_pattern_lines(pattern.left), _pattern_lines(pattern.right)])
    if isinstance(pattern, Optional):
        children = [_pattern_lines(pattern.left), _pattern_lines(pattern.right)]
        if pattern.condition is not None:
            children.append(_expr_lines(pattern.condition))
        return _nest("optional", children)
    if isinstance(pattern, Filter):
        return _nest("filter", [_pattern_lines(pattern.pattern), _expr_lines(pattern.condition)])
    if isinstance(pattern, Graph):
        return _nest(f"graph {_atom(pattern.name)}", [_pattern_lines(pattern.pattern)])
    raise TypeError(f"not a graph pattern: {pattern!r}")


def _expr_lines(expr: flt.FilterExpr) -> list[str]:
    if isinstance(expr, flt.ConstTrue):
        return ["(true)"]
    if isinstance(expr, flt.ConstFalse):
        return ["(false)"]
    if isinstance(expr, flt.Eq):
        return [f"(= {_atom(expr.left)} {_atom(expr.right)})"]
    if isinstance(expr, flt.Neq):
        return [f"(!= {_atom(expr.left)} {_atom(expr.right)})"]
    if isinstance(expr, flt.Bound):
        return [f"(bound {expr.var})"]
    if isinstance(expr, flt.Not):
        return _nest("!", [_expr_lines(expr.operand)])
    if isinstance(expr, (flt.And, flt.Or)):
        head = "&&" if isinstance(expr, flt.And) else "||"
        return _nest(head, [_expr_lines(expr.left), _expr_lines(expr.right)])
    if isinstance(expr, flt.Exists):
        return _nest("exists", [_pattern_lines(expr.pattern)])
    if isinstance(expr, flt.NotExists):
        return _nest("not-exists", [_pattern_lines(expr.pattern)])
    raise TypeError(f"not a filter expression: {expr!r}")


def _nest(head: str, children: list[list[str]]) -> list[str]:
    lines = [f"({head}"]
    for child in children:
        lines.extend("  " + line for line in child)
    lines[-1] += ")"
    return lines
