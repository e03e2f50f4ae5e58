import pytest

from quill.model import Scenario, SourceKind

FIG2 = dict(N=4000.0, M=90000, M_beta=50, eta=0.38, eta_beta=0.5)
FIG3 = dict(M=90000, M_beta=1300, eta=0.38, eta_beta=0.5)
N_TWB_FIG3, N_THB_FIG3 = 4232.0, 3278.0


def fig2_pair(n_beta):
    twb = Scenario(SourceKind.TWB, N_beta=n_beta, **FIG2)
    return twb, twb.replace(source_kind=SourceKind.THB)


def fig3_pair(n_beta):
    twb = Scenario(SourceKind.TWB, N=N_TWB_FIG3, N_beta=n_beta, **FIG3)
    return twb, twb.replace(source_kind=SourceKind.THB, N=N_THB_FIG3)


@pytest.fixture
def small_twb():
    # M=500, M_beta=20, mu1=0.1, mu_beta=50, eta=0.38, eta_beta=0.5
    return Scenario(SourceKind.TWB, N=19.0, M=500, N_beta=500.0, M_beta=20, eta=0.38, eta_beta=0.5)


@pytest.fixture
def small_thb(small_twb):
    return small_twb.replace(source_kind=SourceKind.THB)


# One line per acceptance criterion, printed at the end of the pytest run.
ACCEPTANCE = []


def record(criterion, passed, detail):
    ACCEPTANCE.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{criterion:<4} {'PASS' if passed else 'FAIL'}  {detail}")
