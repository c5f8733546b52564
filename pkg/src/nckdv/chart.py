"""Registry of the KdV-type equations, their links, and exact link verification.

A link ``target_var := image(source_var)`` is verified by computing the
t-derivative of the image along the source equation and subtracting the
target right-hand side with the image substituted.  The link holds iff the
normalized difference is the zero polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from .errors import UnknownEquation
from .grammar import parse
from .ncpoly import EvolutionRule, NCPoly, commutative_normal_form, jet, inv, substitute, t_derive
from .opcalc import (
    Anti, Comm, Conj, D, IdentityCheckSpec, Left, PolyBounds, Right, VerificationReport,
    apply, check_operator_identity, hierarchy_rhs,
)

__all__ = [
    "EquationDef", "LinkDef", "Chart", "DEFAULT_CHART", "equation_rhs", "verify_link",
    "verify_identity", "verify_consistency", "verify_all", "claim_ids", "run_claim",
    "mutate_nonlinear",
]


@dataclass(frozen=True)
class EquationDef:
    id: str
    variable: str
    rhs: NCPoly
    title: str = ""

    @property
    def rule(self) -> EvolutionRule:
        return EvolutionRule(self.variable, self.rhs)


@dataclass(frozen=True)
class LinkDef:
    id: str
    source: str
    target: str
    binding: Mapping[str, NCPoly]
    inverses: Mapping[str, NCPoly] = field(default_factory=dict)
    commutative: bool = False
    converse: "LinkDef | None" = None
    statement: str = ""


def _eq(id, var, text, title) -> EquationDef:
    return EquationDef(id, var, parse(text), title)


_EQUATIONS = [
    _eq("kdv", "U", "U_xxx + 3*{U, U_x}", "KdV"),
    _eq("mkdv", "V", "V_xxx - 3*{V*V, V_x}", "mKdV"),
    _eq("amkdv", "Vtil", "Vtil_xxx + 3*[Vtil, Vtil_xx] - 6*Vtil*Vtil_x*Vtil", "alternative mKdV"),
    _eq("meta", "Q", "Q_xxx - 3*Q_xx*inv(Q)*Q_x", "meta-mKdV"),
    _eq("mirror_meta", "Qtil", "Qtil_xxx - 3*Qtil_x*inv(Qtil)*Qtil_xx", "mirror meta-mKdV"),
    _eq("pkdv", "W", "W_xxx + 3*W_x*W_x", "potential KdV"),
    # q_x q_xx / q with the division carried by the order-0 inverse letter
    _eq("scalar_meta", "q", "q_xxx - 3*q_x*q_xx*inv(q)", "scalar meta-mKdV"),
    # target of the scalar link s = q^2 only
    _eq("int_so", "S", "S_xxx - 3/2*D(S_x*inv(S)*S_x)", "KdV interacting soliton"),
]


def _link(id, source, target, var, image, inverse=None, commutative=False, converse=None, statement=""):
    inverses = {var: parse(inverse)} if inverse else {}
    return LinkDef(id, source, target, {var: parse(image)}, inverses, commutative, converse, statement)


_LINKS = [
    _link("thm1a", "meta", "mkdv", "V", "Q_x*inv(Q)",
          statement="V = Q_x Q^{-1} maps meta-mKdV solutions to mKdV solutions"),
    _link("thm1b", "meta", "amkdv", "Vtil", "inv(Q)*Q_x",
          statement="Vtil = Q^{-1} Q_x maps meta-mKdV solutions to alternative mKdV solutions"),
    _link("prop2", "meta", "mirror_meta", "Qtil", "inv(Q)", inverse="Q",
          converse=_link("prop2", "mirror_meta", "meta", "Q", "inv(Qtil)", inverse="Qtil"),
          statement="Q solves meta-mKdV iff Qtil = Q^{-1} solves mirror meta-mKdV"),
    _link("prop3a", "mirror_meta", "mkdv", "V", "-inv(Qtil)*Qtil_x",
          statement="V = -Qtil^{-1} Qtil_x maps mirror meta-mKdV solutions to mKdV solutions"),
    _link("prop3b", "mirror_meta", "amkdv", "Vtil", "-Qtil_x*inv(Qtil)",
          statement="Vtil = -Qtil_x Qtil^{-1} maps mirror meta-mKdV solutions to alternative mKdV solutions"),
    _link("miura", "mkdv", "kdv", "U", "-(V*V + V_x)",
          statement="Miura map U = -(V^2 + V_x) sends mKdV solutions to KdV solutions"),
    _link("b1", "scalar_meta", "mkdv", "V", "q_x*inv(q)", commutative=True,
          statement="scalar Cole-Hopf v = q_x/q sends scalar meta-mKdV to scalar mKdV"),
    _link("b2", "scalar_meta", "int_so", "S", "q*q", inverse="inv(q)*inv(q)", commutative=True,
          statement="s = q^2 sends scalar meta-mKdV to the scalar KdV interacting soliton equation"),
]


def _identity_specs() -> dict[str, tuple[IdentityCheckSpec, ...]]:
    Q, Qx, Qi = jet("Q"), jet("Q", 1), inv("Q")
    V, Vt, T = jet("V"), jet("Vtil"), jet("T")
    S, Sx, Si = jet("S"), jet("S", 1), inv("S")
    cv = {"V": Qx * Qi}
    ctil = {"Vtil": Qi * Qx}
    qargs = PolyBounds(variables=("P", "Q"), invertible=("Q",))
    sargs = PolyBounds(variables=("P", "S"), invertible=("S",))
    specs = {
        "lemma_identity": (
            IdentityCheckSpec("lemma_identity", (D - Left(V)) @ Right(Q), Right(Q) @ (D - Comm(V)),
                              cv, seed=11, bounds=qargs,
                              paper_ref="(D - L_V) R_Q = R_Q (D - C_V) when Q_x = V Q"),
        ),
        "lemma_C1a": tuple(
            IdentityCheckSpec("lemma_C1a", (D + sign * Left(T)) @ Right(S),
                              Right(S) @ (D + sign * Comm(T)),
                              {"T": (Sx * Si).scale(-sign)}, seed=12 + i, bounds=sargs,
                              paper_ref="(D +- L_T) R_S = R_S (D +- C_T) for T = -+ S_x S^{-1}")
            for i, sign in enumerate((1, -1))
        ),
        "lemma_C1b": tuple(
            IdentityCheckSpec("lemma_C1b", (D + sign * Right(T)) @ Left(S),
                              Left(S) @ (D - sign * Comm(T)),
                              {"T": (Si * Sx).scale(-sign)}, seed=14 + i, bounds=sargs,
                              paper_ref="(D +- R_T) L_S = L_S (D -+ C_T) for T = -+ S^{-1} S_x")
            for i, sign in enumerate((1, -1))
        ),
        "prop_conj_a": (
            IdentityCheckSpec("prop_conj_a", Conj(Q) @ D @ Conj(Qi), D + Comm(Vt),
                              ctil, seed=16, bounds=qargs,
                              paper_ref="K_Q D K_Q^{-1} = D + C_Vtil with Vtil = Q^{-1} Q_x"),
        ),
        "prop_conj_b": (
            IdentityCheckSpec("prop_conj_b", Conj(Q) @ Comm(V) @ Conj(Qi), Comm(Vt),
                              {**cv, **ctil}, seed=17, bounds=qargs,
                              paper_ref="K_Q C_V K_{Q^{-1}} = C_Vtil"),
            IdentityCheckSpec("prop_conj_b", Conj(Q) @ Anti(V) @ Conj(Qi), Anti(Vt),
                              {**cv, **ctil}, seed=18, bounds=qargs,
                              paper_ref="K_Q A_V K_{Q^{-1}} = A_Vtil"),
        ),
    }
    return specs


@dataclass(frozen=True)
class Chart:
    """Immutable registry; ``verify_all`` walks it in insertion order."""

    equations: Mapping[str, EquationDef]
    links: Mapping[str, LinkDef]
    identities: Mapping[str, tuple[IdentityCheckSpec, ...]] = field(default_factory=dict)
    consistency_levels: tuple[int, ...] = ()

    @classmethod
    def default(cls) -> "Chart":
        return cls({e.id: e for e in _EQUATIONS}, {l.id: l for l in _LINKS},
                   _identity_specs(), (2, 3))

    @classmethod
    def empty(cls) -> "Chart":
        return cls({}, {})

    def equation(self, eq_id: str) -> EquationDef:
        try:
            return self.equations[eq_id]
        except KeyError:
            raise UnknownEquation(f"unknown equation {eq_id!r}") from None

    def with_equation(self, eq_id: str, rhs: NCPoly) -> "Chart":
        eqs = dict(self.equations)
        eqs[eq_id] = replace(self.equation(eq_id), rhs=rhs)
        return replace(self, equations=eqs)

    def mutated(self, eq_id: str) -> "Chart":
        """Copy with the sign of the nonlinear part of ``eq_id`` flipped."""
        return self.with_equation(eq_id, mutate_nonlinear(self.equation(eq_id).rhs))

    def claim_ids(self) -> list[str]:
        return (list(self.links) + list(self.identities)
                + ["hier_meta_n2"] * bool(self.consistency_levels)
                + [f"hier_consistency_n{n}" for n in self.consistency_levels])


DEFAULT_CHART = Chart.default()


def mutate_nonlinear(rhs: NCPoly) -> NCPoly:
    return NCPoly({w: -c if len(w) > 1 else c for w, c in rhs})


def equation_rhs(eq_id: str, chart: Chart = DEFAULT_CHART) -> NCPoly:
    return chart.equation(eq_id).rhs


def _link_residual(link: LinkDef, chart: Chart) -> NCPoly:
    source = chart.equation(link.source)
    target = chart.equation(link.target)
    image = link.binding[target.variable]
    lhs = t_derive(image, source.rule)
    rhs = substitute(target.rhs, link.binding, link.inverses)
    residual = lhs - rhs
    return commutative_normal_form(residual) if link.commutative else residual


def verify_link(link_id: str, chart: Chart = DEFAULT_CHART) -> VerificationReport:
    if link_id not in chart.links:
        raise UnknownEquation(f"unknown link {link_id!r}")
    link = chart.links[link_id]
    parts = [link] + ([link.converse] if link.converse else [])
    for part in parts:
        residual = _link_residual(part, chart)
        if not residual.is_zero():
            return VerificationReport(link_id, "fail", witness=residual,
                                      notes=f"{part.source} -> {part.target}", paper_ref=link.statement)
    notes = "both directions" if link.converse else ""
    if link.commutative:
        notes = "checked in the commutative quotient"
    return VerificationReport(link_id, "pass", notes=notes, paper_ref=link.statement)


def verify_identity(claim: str, chart: Chart = DEFAULT_CHART) -> VerificationReport:
    specs = chart.identities[claim]
    total = 0
    for spec in specs:
        report = check_operator_identity(spec)
        if not report.passed:
            return report
        total += report.trials
    return VerificationReport(claim, "pass", trials=total, paper_ref="; ".join(
        dict.fromkeys(s.paper_ref for s in specs)))


def consistency_residual(n: int) -> NCPoly:
    """``R_{Q^{-1}}(D - L_V) Q_{t_{2n-1}}`` minus the mKdV member, both in Q-jets."""
    v_image = jet("Q", 1) * inv("Q")
    transfer = Right(inv("Q")) @ (D - Left(v_image))
    via_meta = apply(transfer, hierarchy_rhs("meta", n))
    via_mkdv = substitute(hierarchy_rhs("mkdv", n), {"V": v_image})
    return via_meta - via_mkdv


def verify_consistency(n: int) -> VerificationReport:
    claim = f"hier_consistency_n{n}"
    statement = (f"Cole-Hopf transfers member {2 * n - 1} of the meta-mKdV hierarchy "
                 f"to member {2 * n - 1} of the mKdV hierarchy")
    residual = consistency_residual(n)
    if residual.is_zero():
        return VerificationReport(claim, "pass", paper_ref=statement)
    return VerificationReport(claim, "fail", witness=residual, paper_ref=statement)


def verify_hierarchy_base(chart: Chart = DEFAULT_CHART) -> VerificationReport:
    statement = "Phi(Q) Q_x reproduces the meta-mKdV right-hand side"
    residual = hierarchy_rhs("meta", 2) - chart.equation("meta").rhs
    if residual.is_zero():
        return VerificationReport("hier_meta_n2", "pass", paper_ref=statement)
    return VerificationReport("hier_meta_n2", "fail", witness=residual, paper_ref=statement)


def run_claim(claim: str, chart: Chart = DEFAULT_CHART) -> VerificationReport:
    if claim in chart.links:
        return verify_link(claim, chart)
    if claim in chart.identities:
        return verify_identity(claim, chart)
    if claim == "hier_meta_n2" and chart.consistency_levels:
        return verify_hierarchy_base(chart)
    if claim.startswith("hier_consistency_n"):
        n = int(claim.rsplit("n", 1)[1])
        if n in chart.consistency_levels:
            return verify_consistency(n)
    raise UnknownEquation(f"unknown claim {claim!r}")


def claim_ids(chart: Chart = DEFAULT_CHART) -> list[str]:
    return chart.claim_ids()


def verify_all(chart: Chart = DEFAULT_CHART) -> list[VerificationReport]:
    return [run_claim(c, chart) for c in chart.claim_ids()]
