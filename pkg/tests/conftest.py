import pytest

from soldisk import DiskTree, build


@pytest.fixture(scope="session")
def preset3():
    return build({"mode": "example5", "k": 1, "q": 2, "r": 1, "delta": "1",
                  "levels": 3, "ns": [2, 3, 4]})


@pytest.fixture(scope="session")
def preset3_tree(preset3):
    return DiskTree(preset3)


@pytest.fixture(scope="session")
def auto_k2():
    # friendly closeness so every level's deck group stays tiny and the
    # whole tree is expandable
    return build({"mode": "auto", "k": 2, "q": 2, "r": 1, "delta": 160,
                  "levels": 3, "seed": 0})


@pytest.fixture(scope="session")
def auto_k2_tree(auto_k2):
    return DiskTree(auto_k2)


@pytest.fixture(scope="session")
def auto_r2():
    return build({"mode": "auto", "k": 1, "q": 2, "r": 2, "delta": 50000,
                  "levels": 2, "seed": 0})


@pytest.fixture(scope="session")
def auto_r2_tree(auto_r2):
    return DiskTree(auto_r2)


# one visible verdict line per acceptance criterion, shown after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
