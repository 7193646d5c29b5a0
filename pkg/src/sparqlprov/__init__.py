"""Provenance-tracking SPARQL engine.

Compiles a SPARQL fragment (AND / UNION / MINUS / OPTIONAL / FILTER / GRAPH)
into annotated relational algebra evaluated over m-semirings: the free
m-semiring yields symbolic how-provenance for every result row, and
homomorphisms into the boolean and counting semirings turn those terms into
trust verdicts and multiplicities.
"""

__version__ = "0.1.0"
