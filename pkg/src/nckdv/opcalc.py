"""Linear operators on differential polynomials.

Operators are small immutable trees built from ``D``, ``D^{-1}``, left and
right multiplications, commutator/anticommutator maps and conjugation, glued
together by sums, compositions, scalings and powers.  Python operators give
the usual algebra: ``a @ b`` composes (``b`` acts first), ``a + b`` adds,
``c * a`` scales.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .errors import GeneratorError, NotExactDerivative, NonInvertibleImage, UnknownEquation, UnsupportedOperator
from .ncpoly import (
    ZERO,
    Letter,
    NCPoly,
    Word,
    formal_integrate,
    inv,
    jet,
    substitute,
    x_derive,
    _word_inverse,
)

__all__ = [
    "Op", "D", "Dinv", "Identity", "Left", "Right", "Comm", "Anti", "Conj",
    "Compose", "Sum", "Scale", "Power", "Inverse",
    "apply", "substitute_op", "build_recursion", "hierarchy_rhs",
    "PolyBounds", "random_poly", "IdentityCheckSpec", "VerificationReport",
    "check_operator_identity", "RECURSION_IDS",
]


def _op_label(p: NCPoly) -> str:
    s = p.to_tex()
    return s if s.isalnum() else "{" + s + "}"


class Op:
    """Base class; subclasses are frozen dataclasses."""

    def __matmul__(self, other: "Op") -> "Op":
        parts = []
        for op in (self, other):
            parts.extend(op.children if isinstance(op, Compose) else (op,))
        return Compose(tuple(parts))

    def __add__(self, other: "Op") -> "Op":
        return Sum((self, other))

    def __sub__(self, other: "Op") -> "Op":
        return Sum((self, Scale(Fraction(-1), other)))

    def __neg__(self) -> "Op":
        return Scale(Fraction(-1), self)

    def __rmul__(self, c) -> "Op":
        return Scale(Fraction(c), self)

    def __pow__(self, n: int) -> "Op":
        return Power(self, n)


@dataclass(frozen=True, eq=True)
class _D(Op):
    def __str__(self):
        return "D"


@dataclass(frozen=True, eq=True)
class _Dinv(Op):
    def __str__(self):
        return "D^{-1}"


@dataclass(frozen=True, eq=True)
class _Identity(Op):
    def __str__(self):
        return "I"


D = _D()
Dinv = _Dinv()
Identity = _Identity()


@dataclass(frozen=True)
class Left(Op):
    a: NCPoly

    def __str__(self):
        return f"L_{_op_label(self.a)}"


@dataclass(frozen=True)
class Right(Op):
    a: NCPoly

    def __str__(self):
        return f"R_{_op_label(self.a)}"


@dataclass(frozen=True)
class Comm(Op):
    a: NCPoly

    def __str__(self):
        return f"C_{_op_label(self.a)}"


@dataclass(frozen=True)
class Anti(Op):
    a: NCPoly

    def __str__(self):
        return f"A_{_op_label(self.a)}"


@dataclass(frozen=True)
class Conj(Op):
    """``x -> a^{-1} x a``; ``inverse`` overrides the derived inverse of ``a``."""

    a: NCPoly
    inverse: NCPoly | None = None

    def inverse_of_a(self) -> NCPoly:
        if self.inverse is not None:
            return self.inverse
        out = _word_inverse(self.a)
        if out is None:
            raise NonInvertibleImage(f"conjugation by non-invertible {self.a}")
        return out

    def __str__(self):
        return f"K_{_op_label(self.a)}"


@dataclass(frozen=True)
class Compose(Op):
    """Right-to-left composition: the last child acts first."""

    children: tuple[Op, ...]

    def __str__(self):
        out = ""
        for c in self.children:
            s = _paren(c)
            if out and not (out.endswith(")") and s.startswith("(")):
                out += " "
            out += s
        return out


@dataclass(frozen=True)
class Sum(Op):
    children: tuple[Op, ...]
    label: str | None = field(default=None, compare=False)

    def __str__(self):
        if self.label:
            return self.label
        out = str(self.children[0])
        for c in self.children[1:]:
            if isinstance(c, Scale) and c.c < 0:
                out += " - " + str(Scale(-c.c, c.child))
            else:
                out += " + " + str(c)
        return out


@dataclass(frozen=True)
class Scale(Op):
    c: Fraction
    child: Op

    def __str__(self):
        if self.c == 1:
            return str(self.child)
        if self.c == -1:
            return "-" + _paren(self.child)
        return f"{self.c}{_paren(self.child)}"


@dataclass(frozen=True)
class Power(Op):
    child: Op
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("Power exponent must be nonnegative")

    def __str__(self):
        return f"{_paren(self.child)}^{self.n}"


@dataclass(frozen=True)
class Inverse(Op):
    """Formal inverse, kept for display only (e.g. a twisted ``D~^{-1}``)."""

    child: Op

    def __str__(self):
        inner = str(self.child)
        if isinstance(self.child, Sum) and self.child.label:
            return f"{inner}^{{-1}}"
        return f"({inner})^{{-1}}"


def _paren(op: Op) -> str:
    if isinstance(op, Sum) and not op.label:
        return f"({op})"
    if isinstance(op, Compose):
        return f"({op})"
    return str(op)


# -- evaluation -----------------------------------------------------------


def apply(op: Op, p: NCPoly) -> NCPoly:
    """Apply ``op`` to ``p``; ``D^{-1}`` raises NotExactDerivative on non-exact input."""
    if isinstance(op, _D):
        return x_derive(p)
    if isinstance(op, _Dinv):
        return formal_integrate(p)
    if isinstance(op, _Identity):
        return p
    if isinstance(op, Left):
        return op.a * p
    if isinstance(op, Right):
        return p * op.a
    if isinstance(op, Comm):
        return op.a * p - p * op.a
    if isinstance(op, Anti):
        return op.a * p + p * op.a
    if isinstance(op, Conj):
        return op.inverse_of_a() * p * op.a
    if isinstance(op, Compose):
        for child in reversed(op.children):
            p = apply(child, p)
        return p
    if isinstance(op, Sum):
        out = ZERO
        for child in op.children:
            out = out + apply(child, p)
        return out
    if isinstance(op, Scale):
        return apply(op.child, p).scale(op.c)
    if isinstance(op, Power):
        for _ in range(op.n):
            p = apply(op.child, p)
        return p
    if isinstance(op, Inverse):
        raise UnsupportedOperator(f"cannot apply formal inverse {op}; verify in multiplied form")
    raise TypeError(f"not an operator: {op!r}")


def substitute_op(op: Op, binding: Mapping[str, NCPoly],
                  inverses: Mapping[str, NCPoly] | None = None) -> Op:
    """Substitute inside every multiplier polynomial of ``op``."""
    def sub(p: NCPoly) -> NCPoly:
        return substitute(p, binding, inverses)

    if isinstance(op, (Left, Right, Comm, Anti)):
        return type(op)(sub(op.a))
    if isinstance(op, Conj):
        inverse = op.inverse
        if inverse is None:
            inverse = op.inverse_of_a()
        return Conj(sub(op.a), sub(inverse))
    if isinstance(op, Compose):
        return Compose(tuple(substitute_op(c, binding, inverses) for c in op.children))
    if isinstance(op, Sum):
        return Sum(tuple(substitute_op(c, binding, inverses) for c in op.children), op.label)
    if isinstance(op, Scale):
        return Scale(op.c, substitute_op(op.child, binding, inverses))
    if isinstance(op, Power):
        return Power(substitute_op(op.child, binding, inverses), op.n)
    if isinstance(op, Inverse):
        return Inverse(substitute_op(op.child, binding, inverses))
    return op


# -- recursion operators --------------------------------------------------

RECURSION_IDS = ("mkdv", "amkdv", "meta", "mirror_meta", "meta_alt", "mirror_meta_alt")


def _psi_core(V: NCPoly, outer_plus: bool) -> list[Op]:
    """``D^{-1}(D +- C_V)(D - A_V D^{-1} A_V)(D -+ C_V)`` as a factor list."""
    first = D + Comm(V) if outer_plus else D - Comm(V)
    last = D - Comm(V) if outer_plus else D + Comm(V)
    return [Dinv, first, D - Anti(V) @ Dinv @ Anti(V), last]


def _twisted_core(W: NCPoly, twist: NCPoly, name: str, outer_plus: bool) -> list[Op]:
    Dt = Sum((D, Comm(twist)), label=name)
    first = Dt + Comm(W) if outer_plus else Dt - Comm(W)
    last = Dt - Comm(W) if outer_plus else Dt + Comm(W)
    return [Inverse(Dt), first, Dt - Anti(W) @ Inverse(Dt) @ Anti(W), last]


def build_recursion(eq_id: str) -> Op:
    """Recursion operator of the named equation, in its factored form."""
    if eq_id == "mkdv":
        V = jet("V")
        return Compose((D - Comm(V) @ Dinv @ Comm(V), D - Anti(V) @ Dinv @ Anti(V)))
    if eq_id == "amkdv":
        W = jet("Vtil")
        Dt = Sum((D, Comm(W)), label="D~")
        return Compose((Dt + Comm(W), Dt - Anti(W), Inverse(Dt),
                        Dt + Anti(W), Dt - Comm(W), Inverse(Dt)))
    if eq_id == "meta":
        Q = jet("Q")
        V = jet("Q", 1) * inv("Q")
        return Compose((Right(Q), *_psi_core(V, outer_plus=True), Right(inv("Q"))))
    if eq_id == "mirror_meta":
        P = jet("Qtil")
        W = inv("Qtil") * jet("Qtil", 1)
        return Compose((Left(P), *_psi_core(W, outer_plus=False), Left(inv("Qtil"))))
    if eq_id == "meta_alt":
        W = inv("Q") * jet("Q", 1)
        return Compose((Left(jet("Q")), *_twisted_core(W, W, "DD", outer_plus=True), Left(inv("Q"))))
    if eq_id == "mirror_meta_alt":
        W = jet("Qtil", 1) * inv("Qtil")
        core = _twisted_core(W, -W, "DD~", outer_plus=False)
        return Compose((Right(jet("Qtil")), *core, Right(inv("Qtil"))))
    raise UnknownEquation(f"no recursion operator registered for {eq_id!r}")


_HIERARCHY_VAR = {"meta": "Q", "mkdv": "V", "mirror_meta": "Qtil"}


@lru_cache(maxsize=None)
def hierarchy_rhs(eq_id: str, n: int) -> NCPoly:
    """Right-hand side ``Phi^{n-1} u_x`` of the n-th hierarchy member."""
    if eq_id not in _HIERARCHY_VAR:
        raise UnknownEquation(f"no symbolic hierarchy for {eq_id!r}")
    if n < 1:
        raise ValueError("hierarchy index n must be >= 1")
    if n == 1:
        return jet(_HIERARCHY_VAR[eq_id], 1)
    return apply(build_recursion(eq_id), hierarchy_rhs(eq_id, n - 1))


# -- randomized identity checking -----------------------------------------


@dataclass(frozen=True)
class PolyBounds:
    max_terms: int = 4
    max_word_len: int = 3
    max_order: int = 3
    coeff_range: int = 5
    variables: tuple[str, ...] = ("P",)
    invertible: tuple[str, ...] = ()


def random_poly(bounds: PolyBounds, seed: int) -> NCPoly:
    """Deterministic pseudo-random polynomial within ``bounds``."""
    rng = random.Random(seed)
    if bounds.max_terms <= 0:
        return ZERO
    letters = [Letter(v, k) for v in bounds.variables for k in range(bounds.max_order + 1)]
    letters += [Letter(v, 0, True) for v in bounds.invertible]
    coeffs = [c for c in range(-bounds.coeff_range, bounds.coeff_range + 1) if c]
    if not letters or not coeffs:
        raise GeneratorError("bounds admit no nonzero polynomial")
    terms: dict[Word, int] = {}
    for _ in range(rng.randint(1, bounds.max_terms)):
        length = rng.randint(1, max(1, bounds.max_word_len))
        word = tuple(rng.choice(letters) for _ in range(length))
        terms[word] = terms.get(word, 0) + rng.choice(coeffs)
    return NCPoly(terms)


@dataclass
class VerificationReport:
    claim: str
    status: str
    witness: NCPoly | None = None
    trials: int | None = None
    notes: str = ""
    paper_ref: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def residual(self) -> float | None:
        if self.status == "skipped":
            return None
        return 0.0 if self.witness is None else float(self.witness.max_abs_coefficient())

    def to_json(self) -> dict:
        return {
            "claim": self.claim,
            "paper_ref": self.paper_ref,
            "status": self.status,
            "residual": self.residual(),
            "witness": None if self.witness is None else str(self.witness),
            "trials": self.trials,
            "points": None,
            "tolerance": None,
        }


@dataclass(frozen=True)
class IdentityCheckSpec:
    """``lhs == rhs`` as operators, checked on random arguments.

    ``constraint`` is substituted into both sides before evaluation, realizing
    side conditions such as ``Q_x = V Q`` through ``V := Q_x Q^{-1}``.
    """

    claim: str
    lhs: Op
    rhs: Op
    constraint: Mapping[str, NCPoly] = field(default_factory=dict)
    trials: int = 20
    seed: int = 0
    bounds: PolyBounds = PolyBounds()
    paper_ref: str = ""

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def check_operator_identity(spec: IdentityCheckSpec) -> VerificationReport:
    if spec.bounds.max_terms <= 0:
        raise GeneratorError("bounds admit no arguments")
    lhs = substitute_op(spec.lhs, spec.constraint) if spec.constraint else spec.lhs
    rhs = substitute_op(spec.rhs, spec.constraint) if spec.constraint else spec.rhs
    ran = 0
    undefined = 0
    for i in range(spec.trials):
        p = random_poly(spec.bounds, spec.seed * 1_000_003 + i)
        try:
            diff = apply(lhs, p) - apply(rhs, p)
        except NotExactDerivative:
            undefined += 1
            continue
        ran += 1
        if not diff.is_zero():
            return VerificationReport(spec.claim, "fail", witness=diff, trials=ran,
                                      notes=f"argument {p}", paper_ref=spec.paper_ref)
    if ran == 0:
        return VerificationReport(spec.claim, "skipped", trials=0,
                                  notes="no trial argument was admissible", paper_ref=spec.paper_ref)
    notes = f"{undefined} inadmissible arguments skipped" if undefined else ""
    return VerificationReport(spec.claim, "pass", trials=ran, notes=notes, paper_ref=spec.paper_ref)
