"""Full-scale acceptance criteria, one test and one printed verdict line each.

Run alone with ``pytest -s tests/test_acceptance.py`` to see the lines.
The three ensemble criteria share one cached 100-seed run.
"""
import pytest

from morselab.acceptance import CRITERIA


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda fn: fn.__name__.removeprefix("criterion_"))
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
