import pytest

from lasat.cnf import Formula

FOUR_VAR_CLAUSES = [(-1, 3), (1, 2, 3), (1, -2, 4), (1, -2, -4), (2, -3, 4)]

FOUR_VAR_DIMACS = """c example formula with four variables
p cnf 4 5
-1 3 0
1 2 3 0
1 -2 4 0
1 -2 -4 0
2 -3 4 0
"""


@pytest.fixture
def four_var():
    return Formula.from_clauses(4, FOUR_VAR_CLAUSES)


def pigeonhole(pigeons, holes):
    """Unsatisfiable when pigeons > holes. Variable p*holes + h + 1 puts
    pigeon p in hole h."""
    var = lambda p, h: p * holes + h + 1
    clauses = [tuple(var(p, h) for h in range(holes)) for p in range(pigeons)]
    for h in range(holes):
        for p in range(pigeons):
            for q in range(p + 1, pigeons):
                clauses.append((-var(p, h), -var(q, h)))
    return Formula.from_clauses(pigeons * holes, clauses)


_criteria = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _criteria.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, detail in sorted(_criteria, key=lambda c: int(c[0].split(".")[0])):
        mark = "PASS" if outcome == "passed" else "FAIL"
        line = f"{mark}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
