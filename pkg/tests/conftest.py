import pytest

from facetmono import DistributionSpec

# the configurations every cross-check runs over
GRID = [
    DistributionSpec("H", 2, beta=2.0),
    DistributionSpec("H", 3, beta=3.0),
    DistributionSpec("B", 2, beta=0.0),
    DistributionSpec("B", 3, beta=1.0),
    DistributionSpec("U", 3),
    DistributionSpec("G", 2),
    DistributionSpec("G", 3),
]


def all_classes(d):
    return [
        DistributionSpec("G", d),
        DistributionSpec("H", d, beta=d / 2 + 1.0),
        DistributionSpec("B", d, beta=0.5),
        DistributionSpec("U", d),
        DistributionSpec("S", d, alpha=0.0),
    ]


@pytest.fixture(params=GRID, ids=str)
def grid_spec(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
