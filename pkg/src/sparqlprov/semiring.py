"""m-semirings and symbolic provenance terms.

An m-semiring is a commutative semiring whose natural order admits a monus:
``x - y`` is the least ``z`` with ``x <= y + z``. The natural numbers
(truncated subtraction) and the booleans (``x and not y``) are instances, and
``FreeMSemiring`` computes in the term algebra over base identifiers, so an
annotation records *how* a row was derived. ``hom_eval`` maps a term into any
other m-semiring by assigning values to the identifiers; specialising the
same term to several semirings is the point of the construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Generic, Iterator, TypeVar


class UnboundIdentifier(Exception):
    """An identifier had no value under the homomorphism's assignment."""

    def __init__(self, name: str) -> None:
        super().__init__(f"no value assigned to identifier {name!r}")
        self.name = name


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Id:
    name: str


@dataclass(frozen=True)
class Add:
    terms: tuple[ProvTerm, ...]

    def __post_init__(self) -> None:
        if len(self.terms) < 2:
            raise ValueError("Add needs at least two operands")


@dataclass(frozen=True)
class Mul:
    terms: tuple[ProvTerm, ...]

    def __post_init__(self) -> None:
        if len(self.terms) < 2:
            raise ValueError("Mul needs at least two operands")


@dataclass(frozen=True)
class Monus:
    left: ProvTerm
    right: ProvTerm


@dataclass(frozen=True)
class Dup:
    """Duplicate-elimination marker: 1 if the inner term is nonzero, else 0."""

    inner: ProvTerm


ProvTerm = Zero | One | Id | Add | Mul | Monus | Dup

ZERO = Zero()
ONE = One()


def render(term: ProvTerm) -> str:
    """Render a term; ``*`` binds tighter than ``+``, monus always in parens.

    Identifiers print verbatim, ``Dup`` prints as ``d(...)``. Add operands
    that are themselves sums never occur after normalisation, but the
    renderer parenthesises defensively so raw terms round-trip too.
    """
    if isinstance(term, Zero):
        return "0"
    if isinstance(term, One):
        return "1"
    if isinstance(term, Id):
        return term.name
    if isinstance(term, Add):
        return "+".join(render(t) for t in term.terms)
    if isinstance(term, Mul):
        return "*".join(_wrap_sum(t) for t in term.terms)
    if isinstance(term, Monus):
        return f"({_wrap_sum(term.left)}-{_wrap_sum(term.right)})"
    if isinstance(term, Dup):
        return f"d({render(term.inner)})"
    raise TypeError(f"not a provenance term: {term!r}")


def _wrap_sum(term: ProvTerm) -> str:
    text = render(term)
    return f"({text})" if isinstance(term, Add) else text


def _sort_key(term: ProvTerm) -> tuple[int, str]:
    # identifiers and constants sort before composite operands
    leaf = isinstance(term, (Id, Zero, One))
    return (0 if leaf else 1, render(term))


def normalize(term: ProvTerm) -> ProvTerm:
    """Rewrite to a canonical form using only identities valid in every
    m-semiring: unit/absorption laws, ``x-0=x``, ``0-x=0``, ``x-x=0``,
    ``d(0)=0``, ``d(1)=1``, ``d(d(x))=d(x)``, and flattening/sorting of the
    associative-commutative operators. No distribution and no cancellation
    through monus, so the normal form is sound but not complete: some
    semantically-zero terms keep a non-Zero shape.
    """
    if isinstance(term, (Zero, One, Id)):
        return term
    if isinstance(term, Add):
        flat: list[ProvTerm] = []
        for op in term.terms:
            n = normalize(op)
            if isinstance(n, Add):
                flat.extend(n.terms)
            elif not isinstance(n, Zero):
                flat.append(n)
        if not flat:
            return ZERO
        if len(flat) == 1:
            return flat[0]
        return Add(tuple(sorted(flat, key=_sort_key)))
    if isinstance(term, Mul):
        flat = []
        for op in term.terms:
            n = normalize(op)
            if isinstance(n, Zero):
                return ZERO
            if isinstance(n, Mul):
                flat.extend(n.terms)
            elif not isinstance(n, One):
                flat.append(n)
        if not flat:
            return ONE
        if len(flat) == 1:
            return flat[0]
        return Mul(tuple(sorted(flat, key=_sort_key)))
    if isinstance(term, Monus):
        left = normalize(term.left)
        right = normalize(term.right)
        if isinstance(right, Zero):
            return left
        if isinstance(left, Zero):
            return ZERO
        if left == right:
            return ZERO
        return Monus(left, right)
    if isinstance(term, Dup):
        inner = normalize(term.inner)
        if isinstance(inner, (Zero, One, Dup)):
            return inner
        return Dup(inner)
    raise TypeError(f"not a provenance term: {term!r}")


def identifiers(term: ProvTerm) -> Iterator[str]:
    """All identifier names occurring in the term (with repeats)."""
    if isinstance(term, Id):
        yield term.name
    elif isinstance(term, (Add, Mul)):
        for op in term.terms:
            yield from identifiers(op)
    elif isinstance(term, Monus):
        yield from identifiers(term.left)
        yield from identifiers(term.right)
    elif isinstance(term, Dup):
        yield from identifiers(term.inner)


K = TypeVar("K")


class MSemiring(Generic[K]):
    """A commutative semiring with monus, given by its operations.

    ``dup_annotation`` is the relation-level duplicate-elimination hook: the
    annotation a support row receives after dedup. Concrete semirings map
    every nonzero to one; the free semiring may have to keep a symbolic
    marker (see :class:`FreeMSemiring`).
    """

    def __init__(
        self,
        name: str,
        zero: K,
        one: K,
        add: Callable[[K, K], K],
        mul: Callable[[K, K], K],
        monus: Callable[[K, K], K],
    ) -> None:
        self.name = name
        self.zero = zero
        self.one = one
        self.add = add
        self.mul = mul
        self.monus = monus

    def is_zero(self, value: K) -> bool:
        return value == self.zero

    def dup_annotation(self, value: K) -> K:
        return self.one

    def __repr__(self) -> str:
        return f"MSemiring({self.name})"


nat_semiring: MSemiring[int] = MSemiring(
    "nat",
    zero=0,
    one=1,
    add=lambda x, y: x + y,
    mul=lambda x, y: x * y,
    monus=lambda x, y: max(x - y, 0),
)

bool_semiring: MSemiring[bool] = MSemiring(
    "bool",
    zero=False,
    one=True,
    add=lambda x, y: x or y,
    mul=lambda x, y: x and y,
    monus=lambda x, y: x and not y,
)


def _contains_monus(term: ProvTerm) -> bool:
    if isinstance(term, Monus):
        return True
    if isinstance(term, (Add, Mul)):
        return any(_contains_monus(t) for t in term.terms)
    if isinstance(term, Dup):
        return _contains_monus(term.inner)
    return False


class FreeMSemiring(MSemiring[ProvTerm]):
    """Term-level m-semiring over identifiers; values stay normalised.

    Zero testing is syntactic (normal form equals Zero), which is sound but
    incomplete for terms containing monus; everything downstream only relies
    on soundness.
    """

    def __init__(self) -> None:
        super().__init__(
            "free",
            zero=ZERO,
            one=ONE,
            add=lambda x, y: normalize(Add((x, y))),
            mul=lambda x, y: normalize(Mul((x, y))),
            monus=lambda x, y: normalize(Monus(x, y)),
        )

    def dup_annotation(self, value: ProvTerm) -> ProvTerm:
        # monus-free annotations of support rows are provably nonzero, so
        # dedup can emit a plain 1; otherwise keep a symbolic marker
        if _contains_monus(value):
            return normalize(Dup(value))
        return ONE


free_msemiring = FreeMSemiring()


def hom_eval(term: ProvTerm, semiring: MSemiring[K], assignment: dict[str, K]) -> K:
    """Evaluate a term in ``semiring`` under an identifier assignment.

    This is the semiring homomorphism extending ``assignment``; ``Dup``
    evaluates to one exactly when its argument is nonzero. Raises
    :class:`UnboundIdentifier` for identifiers missing from the assignment.
    """
    if isinstance(term, Zero):
        return semiring.zero
    if isinstance(term, One):
        return semiring.one
    if isinstance(term, Id):
        try:
            return assignment[term.name]
        except KeyError:
            raise UnboundIdentifier(term.name) from None
    if isinstance(term, Add):
        value = hom_eval(term.terms[0], semiring, assignment)
        for op in term.terms[1:]:
            value = semiring.add(value, hom_eval(op, semiring, assignment))
        return value
    if isinstance(term, Mul):
        value = hom_eval(term.terms[0], semiring, assignment)
        for op in term.terms[1:]:
            value = semiring.mul(value, hom_eval(op, semiring, assignment))
        return value
    if isinstance(term, Monus):
        return semiring.monus(
            hom_eval(term.left, semiring, assignment),
            hom_eval(term.right, semiring, assignment),
        )
    if isinstance(term, Dup):
        inner = hom_eval(term.inner, semiring, assignment)
        return semiring.zero if semiring.is_zero(inner) else semiring.one
    raise TypeError(f"not a provenance term: {term!r}")
