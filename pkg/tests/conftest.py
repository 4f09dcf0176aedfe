import pytest

from nestder.nest import NestSpec, build

ACCEPTANCE_NESTS = [(1, 2), (2,), (1, 2, 3), (1, 3), (2, 4), (1, 2, 4), (1, 2, 3, 6)]
SMALL_NESTS = [(1, 2), (2,), (1, 3), (1, 2, 3)]


@pytest.fixture(params=SMALL_NESTS, ids=lambda d: "nest" + "-".join(map(str, d)))
def small_basis(request):
    return build(NestSpec(request.param))

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
