import pytest


@pytest.fixture
def worked_pair():
    """The frozen one-word-anchor pair used throughout the docs and tests.

    Canonical script: K K D D A(in) K D D A(close) A(race) A(around)
    A(a) A(corner) — 3 keeps, 4 deletes, 6 adds, 10 editing steps.
    """
    src = "motorcyclists are stopped at a stop sign".split()
    dst = "motorcyclists are in a close race around a corner".split()
    return src, dst


EXPECTED_WORKED_OPS = [
    ("KEEP", None),
    ("KEEP", None),
    ("DELETE", None),
    ("DELETE", None),
    ("ADD", "in"),
    ("KEEP", None),
    ("DELETE", None),
    ("DELETE", None),
    ("ADD", "close"),
    ("ADD", "race"),
    ("ADD", "around"),
    ("ADD", "a"),
    ("ADD", "corner"),
]


@pytest.fixture
def worked_ops():
    return list(EXPECTED_WORKED_OPS)
