"""Every acceptance criterion at its stated tolerance, one line per criterion."""

import pytest

from shiftgraphs import acceptance, rng


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: f"criterion-{c.id:02d}")
def test_criterion(check, capsys):
    result = acceptance.run_check(check, acceptance.BUDGETS["full"], rng.DEFAULT_SEED)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.status == "pass", result.detail
