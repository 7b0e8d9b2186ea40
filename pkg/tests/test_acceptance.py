"""Acceptance suite: one test per numbered criterion, each at its stated
tolerance, printing one pass/fail line per criterion."""

import pytest

from nullplane.lab.selftest import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=[fn.__name__ for fn in CRITERIA])
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
