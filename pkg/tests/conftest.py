from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from nckdv.ncpoly import Letter, NCPoly

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

coefficients = st.fractions(min_value=-6, max_value=6, max_denominator=4).filter(bool)


def letters(variables=("P", "Q"), invertible=("Q",), max_order=3):
    plain = [Letter(v, k) for v in variables for k in range(max_order + 1)]
    inverted = [Letter(v, 0, True) for v in invertible]
    return st.sampled_from(plain + inverted)


def words(max_len=4, **kw):
    return st.lists(letters(**kw), max_size=max_len).map(tuple)


def polys(max_terms=4, max_len=4, **kw):
    """Random NCPoly built from possibly unreduced words."""
    return st.lists(st.tuples(words(max_len, **kw), coefficients), max_size=max_terms).map(NCPoly)


def raw_terms(max_terms=4, max_len=5, **kw):
    return st.lists(st.tuples(words(max_len, **kw), st.integers(-3, 3)), max_size=max_terms)


ALGEBRA = settings(max_examples=150, deadline=None)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
