"""Acceptance gate: every shipped claim checked end to end.

Each criterion prints exactly one line --

    <name>: PASS|FAIL|SKIP - <detail>

so a plain ``pytest -v tests/test_acceptance.py -s`` reads as a
checklist.  Criteria are self-contained: they build their own maps,
solve their own measures, and compare against independent oracles
(finite differences, Birkhoff averages, pinned baselines), never
against the code under test.
"""
from __future__ import annotations

import pytest

from automeasure.acceptance import CRITERIA

_NAMES = [name for name, _ in CRITERIA]


@pytest.mark.parametrize("name,check", CRITERIA, ids=_NAMES)
def test_criterion(name, check):
    passed, detail = check()
    verdict = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
    print(f"{name}: {verdict} - {detail}")
    if passed is None:
        pytest.skip(detail)
    assert passed, f"{name}: {detail}"
