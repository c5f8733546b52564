"""Acceptance criteria 1-9, each at its stated tolerance and time budget."""

import subprocess
import sys
import time
from pathlib import Path

from conftest import ACCEPTANCE
from nckdv import parse
from nckdv.chart import DEFAULT_CHART, _link_residual, run_claim, verify_link
from nckdv.ncpoly import inv, jet, substitute, formal_integrate
from nckdv.opcalc import D, Anti, Comm, Dinv, Right, apply, check_operator_identity, hierarchy_rhs
from nckdv.solitonlab import (SolitonParams, check_lemmas, hierarchy_residual, pde_residual,
                              sample_points, soliton_fields, SUITE_EQUATIONS)

TESTS = Path(__file__).parent


class Criterion:
    def __init__(self, number: int, budget: float):
        self.number, self.budget = number, budget
        self.failures: list[str] = []

    def check(self, ok: bool, what: str) -> None:
        if not ok:
            self.failures.append(what)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        self.check(elapsed < self.budget, f"took {elapsed:.1f}s, budget {self.budget:g}s")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures) or f"{elapsed:.2f}s"
        ACCEPTANCE.append(f"criterion {self.number}: {status} ({detail})")
        if exc is None:
            assert not self.failures, self.failures
        return False


def _zero_links(c, ids):
    for link_id in ids:
        link = DEFAULT_CHART.links[link_id]
        c.check(_link_residual(link, DEFAULT_CHART).is_zero(), f"{link_id} residual nonzero")
        if link.converse:
            c.check(_link_residual(link.converse, DEFAULT_CHART).is_zero(),
                    f"{link_id} converse residual nonzero")
        c.check(verify_link(link_id).passed, f"{link_id} did not pass")


def test_criterion_1_cole_hopf_links():
    with Criterion(1, 5.0) as c:
        _zero_links(c, ["thm1a", "thm1b"])


def test_criterion_2_mirror_links():
    with Criterion(2, 5.0) as c:
        _zero_links(c, ["prop2", "prop3a", "prop3b"])
        Q, Qi = jet("Q"), inv("Q")
        to_q = ({"Qtil": Qi}, {"Qtil": Q})
        literal = substitute(parse("Qtil_xxx - 3*Qtil_xx*inv(Qtil)*Qtil_x"), *to_q)
        c.check(Q * literal * Q == -parse("Q_xxx - 3*Q_x*inv(Q)*Q_xx"), "inversion identity, literal ordering")
        mirrored = substitute(DEFAULT_CHART.equation("mirror_meta").rhs, *to_q)
        c.check(Q * mirrored * Q == -DEFAULT_CHART.equation("meta").rhs, "inversion identity, registered ordering")


def test_criterion_3_operator_identities():
    with Criterion(3, 10.0) as c:
        for claim in ("lemma_identity", "lemma_C1a", "lemma_C1b", "prop_conj_a", "prop_conj_b"):
            for spec in DEFAULT_CHART.identities[claim]:
                report = check_operator_identity(spec)
                c.check(report.passed and report.trials == spec.trials == 20,
                        f"{claim}: {report.status} after {report.trials} trials")


def test_criterion_4_hierarchy_generation():
    hierarchy_rhs.cache_clear()
    with Criterion(4, 30.0) as c:
        Q, Qx, Qi = jet("Q"), jet("Q", 1), inv("Q")
        V, Vx = jet("V"), jet("V", 1)
        c.check(formal_integrate(V * Vx + Vx * V) == V * V, "D^{-1}{V, V_x} = V^2")
        c.check(apply(D - Anti(V) @ Dinv @ Anti(V), Vx) == jet("V", 2) - 2 * V * V * V,
                "(D - A_V D^{-1} A_V) V_x = V_xx - 2V^3")
        Vq = Qx * Qi
        c.check(substitute(apply((D - Comm(V)) @ Right(Qi), Qx), {"V": Vq})
                == substitute(Vx, {"V": Vq}), "(D - C_V) R_{Q^{-1}} Q_x = V_x")
        c.check(hierarchy_rhs("meta", 2) == DEFAULT_CHART.equation("meta").rhs, "meta member 2")
        for n in (2, 3):
            c.check(run_claim(f"hier_consistency_n{n}").passed, f"hier_consistency_n{n}")


def test_criterion_5_scalar_and_miura_links():
    with Criterion(5, 5.0) as c:
        _zero_links(c, ["miura", "b1", "b2"])


def _criterion_6_configs():
    for d in (1, 2, 3):
        for seed in range(5):
            params = SolitonParams.random(d, seed)
            yield d, seed, params, sample_points(params, 10, seed)


def test_criterion_6_numeric_solitons():
    with Criterion(6, 10.0) as c:
        for d, seed, params, points in _criterion_6_configs():
            for pt in points:
                fields = soliton_fields(params, pt, order=3)
                for eq in SUITE_EQUATIONS:
                    r = pde_residual(eq, fields)
                    c.check(r <= 1e-8, f"d={d} seed={seed} {eq} residual {r:.2e}")
            lemmas = check_lemmas(params, points, 1e-8)
            c.check(lemmas.passed, f"d={d} seed={seed} lemmas {lemmas.details}")


def test_criterion_7_hierarchy_solitons():
    with Criterion(7, 20.0) as c:
        for seed in range(3):
            params = SolitonParams.random(2, seed, N=3)
            points = sample_points(params, 10, seed)
            e3 = hierarchy_residual(params, 2, points, 1e-8)
            e5 = hierarchy_residual(params, 3, points, 1e-7)
            c.check(e3.passed, f"seed={seed} E3 {e3.details}")
            c.check(e5.details["meta"] <= 1e-7, f"seed={seed} E5 meta {e5.details['meta']:.2e}")
            c.check(e5.details["amkdv"] <= 1e-7, f"seed={seed} E5 amkdv {e5.details['amkdv']:.2e}")
            c.check(e5.passed, f"seed={seed} E5 {e5.details}")


def test_criterion_8_mutation_sensitivity():
    with Criterion(8, 30.0) as c:
        chart = DEFAULT_CHART.mutated("meta")
        report = verify_link("thm1a", chart)
        c.check(report.status == "fail" and report.witness is not None
                and not report.witness.is_zero(), "thm1a still passes after mutation")
        for d, seed, params, points in _criterion_6_configs():
            worst = max(pde_residual("meta", soliton_fields(params, pt, order=3), chart=chart)
                        for pt in points)
            c.check(worst > 1e-2, f"d={d} seed={seed} mutated meta residual only {worst:.2e}")


def test_criterion_9_property_suites():
    with Criterion(9, 60.0) as c:
        modules = ["test_ncpoly.py", "test_grammar.py", "test_opcalc.py", "test_chart.py",
                   "test_solitonlab.py", "test_cli.py"]
        proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                               *[str(TESTS / m) for m in modules]],
                              capture_output=True, text=True, cwd=TESTS.parent)
        tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr
        c.check(proc.returncode == 0, f"property suites failed: {tail}")
