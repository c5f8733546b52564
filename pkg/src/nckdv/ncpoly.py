"""Free associative differential algebra over jet letters.

A polynomial is a finite map from words (tuples of :class:`Letter`) to exact
rational coefficients.  Words are kept reduced, i.e. no adjacent ``u u^{-1}``
or ``u^{-1} u`` pair survives, and terms iterate in a fixed canonical order so
that equality of two polynomials is plain structural equality.

The x-derivative acts on letters by raising the jet order and on inverse
letters by ``D(u^{-1}) = -u^{-1} u_x u^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

from .errors import NonInvertibleImage, NotExactDerivative, UnknownVariable

__all__ = [
    "Letter",
    "Word",
    "NCPoly",
    "EvolutionRule",
    "jet",
    "inv",
    "const",
    "ZERO",
    "ONE",
    "commutator",
    "anticommutator",
    "reduce_word",
    "x_derive",
    "x_derive_n",
    "t_derive",
    "substitute",
    "formal_integrate",
    "commutative_normal_form",
]


class Letter(NamedTuple):
    """The jet ``var^{(order)}``, or its formal inverse when ``inv`` is set.

    Tuple comparison of letters gives the canonical order (variable name,
    jet order, inverted flag); words compare lexicographically on top of it.
    """

    var: str
    order: int = 0
    inv: bool = False

    def __str__(self) -> str:
        if self.inv:
            return f"inv({_jet_name(self.var, self.order)})"
        return _jet_name(self.var, self.order)

    def partner(self) -> "Letter":
        return Letter(self.var, self.order, not self.inv)


Word = tuple[Letter, ...]


def _jet_name(var: str, order: int) -> str:
    if order == 0:
        return var
    if order <= 4:
        return f"{var}_{'x' * order}"
    return f"{var}_x{order}"


def reduce_word(word: Iterable[Letter], reverse: bool = False) -> Word:
    """Cancel adjacent inverse pairs with a single stack scan.

    ``reverse=True`` scans right to left; both scans give the same result
    because the rewriting system ``u u^{-1} -> 1`` is confluent.
    """
    letters = list(word)
    if reverse:
        letters.reverse()
    stack: list[Letter] = []
    for letter in letters:
        if stack and stack[-1].var == letter.var and stack[-1].order == letter.order \
                and stack[-1].inv != letter.inv:
            stack.pop()
        else:
            stack.append(letter)
    if reverse:
        stack.reverse()
    return tuple(stack)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


class NCPoly:
    """Immutable normalized noncommutative differential polynomial."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Iterable[Letter], object] | Iterable[tuple[Iterable[Letter], object]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Word, Fraction] = {}
        for word, coeff in items:
            c = _as_fraction(coeff)
            if not c:
                continue
            w = reduce_word(word)
            acc[w] = acc.get(w, Fraction(0)) + c
        self._terms = {w: acc[w] for w in sorted(acc) if acc[w]}
        self._hash = None

    @classmethod
    def _from_reduced(cls, acc: dict[Word, Fraction]) -> "NCPoly":
        # words already reduced; only drop zeros and sort
        obj = cls.__new__(cls)
        obj._terms = {w: acc[w] for w in sorted(acc) if acc[w]}
        obj._hash = None
        return obj

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> Mapping[Word, Fraction]:
        return MappingProxyType(self._terms)

    def __iter__(self) -> Iterator[tuple[Word, Fraction]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, word: Iterable[Letter]) -> Fraction:
        return self._terms.get(tuple(word), Fraction(0))

    def letters(self) -> set[Letter]:
        return {letter for word in self._terms for letter in word}

    def variables(self) -> set[str]:
        return {letter.var for letter in self.letters()}

    def max_order(self) -> int:
        return max((letter.order for letter in self.letters()), default=0)

    def max_abs_coefficient(self) -> Fraction:
        return max((abs(c) for c in self._terms.values()), default=Fraction(0))

    def weight(self, var: str | None = None) -> set[int]:
        """Set of word weights, where the jet of order ``k`` weighs ``k + 1``.

        Inverse letters weigh ``-1``.  Restricted to ``var`` when given.
        """
        out = set()
        for word in self._terms:
            w = 0
            for letter in word:
                if var is not None and letter.var != var:
                    continue
                w += -1 if letter.inv else letter.order + 1
            out.add(w)
        return out

    # -- arithmetic -------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, NCPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == const(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other) -> "NCPoly":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for w, c in other._terms.items():
            acc[w] = acc.get(w, Fraction(0)) + c
        return NCPoly._from_reduced(acc)

    __radd__ = __add__

    def __neg__(self) -> "NCPoly":
        return NCPoly._from_reduced({w: -c for w, c in self._terms.items()})

    def __sub__(self, other) -> "NCPoly":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "NCPoly":
        return (-self) + other

    def scale(self, c) -> "NCPoly":
        c = _as_fraction(c)
        if not c:
            return ZERO
        return NCPoly._from_reduced({w: c * v for w, v in self._terms.items()})

    def __mul__(self, other) -> "NCPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, NCPoly):
            return NotImplemented
        acc: dict[Word, Fraction] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                w = reduce_word(w1 + w2)
                acc[w] = acc.get(w, Fraction(0)) + c1 * c2
        return NCPoly._from_reduced(acc)

    def __rmul__(self, other) -> "NCPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> "NCPoly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    # -- printing ---------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (word, c) in enumerate(self._terms.items()):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if not word:
                body = _fmt_rational(mag)
            elif mag == 1:
                body = "*".join(map(str, word))
            else:
                body = _fmt_rational(mag) + "*" + "*".join(map(str, word))
            if i == 0:
                parts.append(("-" if sign == "-" else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"NCPoly({str(self)!r})"

    def to_tex(self) -> str:
        """Render in the usual subscript notation, e.g. ``Q_{xx}Q^{-1}Q_{x}``."""
        if not self._terms:
            return "0"
        out = []
        for i, (word, c) in enumerate(self._terms.items()):
            mag = abs(c)
            coeff = "" if mag == 1 and word else _fmt_rational(mag)
            body = coeff + "".join(_tex_letter(l) for l in word)
            if i == 0:
                out.append(("-" if c < 0 else "") + body)
            else:
                out.append((" - " if c < 0 else " + ") + body)
        return "".join(out)


def _tex_letter(letter: Letter) -> str:
    sub = "" if letter.order == 0 else "_{" + "x" * letter.order + "}"
    return letter.var + sub + ("^{-1}" if letter.inv else "")


def _fmt_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _coerce(x):
    if isinstance(x, NCPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return const(x)
    return NotImplemented


def const(c) -> NCPoly:
    return NCPoly({(): c})


ZERO = NCPoly()
ONE = const(1)


def jet(var: str, order: int = 0) -> NCPoly:
    return NCPoly({(Letter(var, order),): 1})


def inv(var: str) -> NCPoly:
    return NCPoly({(Letter(var, 0, True),): 1})


def commutator(a: NCPoly, b: NCPoly) -> NCPoly:
    return a * b - b * a


def anticommutator(a: NCPoly, b: NCPoly) -> NCPoly:
    return a * b + b * a


# -- derivations ----------------------------------------------------------


@lru_cache(maxsize=None)
def _letter_x_derivative(letter: Letter) -> tuple[tuple[Word, Fraction], ...]:
    if letter.inv:
        if letter.order != 0:
            raise NotImplementedError("inverses of higher jets are not supported")
        u_inv = letter
        return (((u_inv, Letter(letter.var, 1), u_inv), Fraction(-1)),)
    return (((Letter(letter.var, letter.order + 1),), Fraction(1)),)


@lru_cache(maxsize=65536)
def _word_x_derivative(word: Word) -> tuple[tuple[Word, Fraction], ...]:
    acc: dict[Word, Fraction] = {}
    for i, letter in enumerate(word):
        head, tail = word[:i], word[i + 1:]
        for mid, c in _letter_x_derivative(letter):
            # replacing a letter by its derivative never creates a cancellable pair
            w = head + mid + tail
            acc[w] = acc.get(w, Fraction(0)) + c
    return tuple((w, c) for w, c in acc.items() if c)


def x_derive(p: NCPoly) -> NCPoly:
    """Total x-derivative."""
    acc: dict[Word, Fraction] = {}
    for word, c in p:
        for w, d in _word_x_derivative(word):
            acc[w] = acc.get(w, Fraction(0)) + c * d
    return NCPoly._from_reduced(acc)


def x_derive_n(p: NCPoly, n: int) -> NCPoly:
    for _ in range(n):
        p = x_derive(p)
    return p


def _expand_word(word: Word, image: Callable[[Letter], NCPoly | None]) -> NCPoly:
    out = ONE
    pending: list[Letter] = []
    for letter in word:
        img = image(letter)
        if img is None:
            pending.append(letter)
            continue
        if pending:
            out = out * NCPoly._from_reduced({tuple(pending): Fraction(1)})
            pending = []
        out = out * img
    if pending:
        out = out * NCPoly._from_reduced({tuple(pending): Fraction(1)})
    return out


def _leibniz(p: NCPoly, derive_letter: Callable[[Letter], NCPoly]) -> NCPoly:
    """Extend a letter-level derivation to ``p`` by the product rule."""
    acc: dict[Word, Fraction] = {}
    for word, c in p:
        for i, letter in enumerate(word):
            d = derive_letter(letter)
            if d.is_zero():
                continue
            head = word[:i]
            tail = word[i + 1:]
            for mid, e in d:
                w = reduce_word(head + mid + tail)
                acc[w] = acc.get(w, Fraction(0)) + c * e
    return NCPoly._from_reduced(acc)


@dataclass(frozen=True)
class EvolutionRule:
    """The evolution equation ``var_t = rhs``."""

    variable: str
    rhs: NCPoly

    def __post_init__(self):
        foreign = self.rhs.variables() - {self.variable}
        if foreign:
            raise UnknownVariable(
                f"rule for {self.variable} mentions {', '.join(sorted(foreign))}")

    def __str__(self) -> str:
        return f"{self.variable}_t = {self.rhs}"


@lru_cache(maxsize=1024)
def _rule_jet(rule: EvolutionRule, order: int) -> NCPoly:
    if order == 0:
        return rule.rhs
    return x_derive(_rule_jet(rule, order - 1))


def t_derive(p: NCPoly, rule: EvolutionRule) -> NCPoly:
    """Total t-derivative of ``p`` along solutions of ``rule``."""
    foreign = p.variables() - {rule.variable}
    if foreign:
        raise UnknownVariable(
            f"t-derivative under {rule.variable}_t needs a polynomial in {rule.variable} only; "
            f"found {', '.join(sorted(foreign))}")

    def d_letter(letter: Letter) -> NCPoly:
        if letter.inv:
            u_inv = NCPoly._from_reduced({(letter,): Fraction(1)})
            return -(u_inv * rule.rhs * u_inv)
        return _rule_jet(rule, letter.order)

    return _leibniz(p, d_letter)


def _word_inverse(p: NCPoly) -> NCPoly | None:
    """Inverse of ``c * w`` when every letter of ``w`` is an order-0 jet."""
    if len(p) != 1:
        return None
    (word, c), = p
    if any(letter.order != 0 for letter in word):
        return None
    return NCPoly._from_reduced({tuple(l.partner() for l in reversed(word)): 1 / c})


def substitute(p: NCPoly, binding: Mapping[str, NCPoly],
               inverses: Mapping[str, NCPoly] | None = None) -> NCPoly:
    """Replace jets of each bound variable by x-derivatives of its image.

    ``u^{-1}`` is replaced by ``inverses[u]`` when supplied, otherwise by the
    inverse of the image if the image is a single word of order-0 letters.
    """
    inverses = dict(inverses or {})
    jets: dict[tuple[str, int], NCPoly] = {}

    def image(letter: Letter) -> NCPoly | None:
        if letter.var not in binding:
            return None
        if letter.inv:
            if letter.var not in inverses:
                candidate = _word_inverse(binding[letter.var])
                if candidate is None:
                    raise NonInvertibleImage(
                        f"cannot invert image {binding[letter.var]} of {letter.var}")
                inverses[letter.var] = candidate
            return inverses[letter.var]
        key = (letter.var, letter.order)
        if key not in jets:
            jets[key] = x_derive_n(binding[letter.var], letter.order)
        return jets[key]

    acc = ZERO
    parts: dict[Word, Fraction] = {}
    for word, c in p:
        if not any(letter.var in binding for letter in word):
            parts[word] = parts.get(word, Fraction(0)) + c
            continue
        acc = acc + _expand_word(word, image).scale(c)
    return acc + NCPoly._from_reduced(parts)


# -- integration ----------------------------------------------------------


def _solve_exact(columns: list[Mapping[Word, Fraction]], target: Mapping[Word, Fraction]) -> list[Fraction] | None:
    """Solve ``sum_j x_j * columns[j] == target`` exactly, or return None."""
    rows: dict[Word, dict[int, Fraction]] = {}
    for j, col in enumerate(columns):
        for w, c in col.items():
            rows.setdefault(w, {})[j] = c
    for w in target:
        rows.setdefault(w, {})
    # Gauss-Jordan on sparse rows; pivots maps column -> (row, rhs)
    pivots: dict[int, tuple[dict[int, Fraction], Fraction]] = {}
    for w, row in rows.items():
        row = dict(row)
        rhs = Fraction(target.get(w, 0))
        for col in [c for c in row if c in pivots]:
            factor = row.get(col)
            if not factor:
                continue
            prow, prhs = pivots[col]
            for k, v in prow.items():
                nv = row.get(k, Fraction(0)) - factor * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            rhs -= factor * prhs
        if not row:
            if rhs:
                return None
            continue
        col = min(row)
        lead = row[col]
        row = {k: v / lead for k, v in row.items()}
        rhs /= lead
        for pc, (prow, prhs) in list(pivots.items()):
            factor = prow.get(col)
            if not factor:
                continue
            for k, v in row.items():
                nv = prow.get(k, Fraction(0)) - factor * v
                if nv:
                    prow[k] = nv
                else:
                    prow.pop(k, None)
            pivots[pc] = (prow, prhs - factor * rhs)
        pivots[col] = (row, rhs)
    solution = [Fraction(0)] * len(columns)
    for col, (row, rhs) in pivots.items():
        # free columns are set to zero, so pivot rows read off directly
        solution[col] = rhs
    return solution


def _lowerings(word: Word) -> Iterator[Word]:
    for i, letter in enumerate(word):
        if letter.inv or letter.order == 0:
            continue
        yield reduce_word(word[:i] + (Letter(letter.var, letter.order - 1),) + word[i + 1:])


def _integration_candidates(p: NCPoly, max_rounds: int = 64) -> list[Word]:
    # Lowered words of p alone can miss antiderivative terms whose derivatives
    # cancel inside p (V_x*V_x in D^{-1}{V, V_xxx}), so close the candidate set
    # under "differentiate, then lower" until it stops growing.
    candidates: set[Word] = set()
    frontier = {w for word, _ in p for w in _lowerings(word)}
    seen_targets = {word for word, _ in p}
    for _ in range(max_rounds):
        frontier -= candidates
        if not frontier:
            break
        candidates |= frontier
        new_targets = {w for c in frontier for w, _ in _word_x_derivative(c)} - seen_targets
        seen_targets |= new_targets
        frontier = {w for t in new_targets for w in _lowerings(t)}
    return sorted(candidates)


def formal_integrate(p: NCPoly) -> NCPoly:
    """Return ``q`` with ``x_derive(q) == p``.

    The antiderivative is sought in the finite span of candidate words built
    by _integration_candidates; x_derive preserves the per-variable weight, so
    the candidates never leave the weight classes present in ``p``.
    """
    if p.is_zero():
        return ZERO
    basis = _integration_candidates(p)
    columns = [dict(_word_x_derivative(w)) for w in basis]
    solution = _solve_exact(columns, p.terms)
    if solution is None:
        raise NotExactDerivative(f"{p} is not the x-derivative of a differential polynomial")
    q = NCPoly._from_reduced({w: c for w, c in zip(basis, solution) if c})
    if x_derive(q) != p:
        raise NotExactDerivative(f"{p} is not the x-derivative of a differential polynomial")
    return q


def commutative_normal_form(p: NCPoly) -> NCPoly:
    """Image of ``p`` in the commutative quotient: letters sorted, ``u u^{-1}`` cancelled."""
    acc: dict[Word, Fraction] = {}
    for word, c in p:
        counts: dict[Letter, int] = {}
        for letter in word:
            counts[letter] = counts.get(letter, 0) + 1
        for letter in list(counts):
            if letter.inv and letter.partner() in counts:
                k = min(counts[letter], counts[letter.partner()])
                counts[letter] -= k
                counts[letter.partner()] -= k
        w = tuple(sorted(l for l, k in counts.items() for _ in range(k)))
        acc[w] = acc.get(w, Fraction(0)) + c
    return NCPoly._from_reduced(acc)
