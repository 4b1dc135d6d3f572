"""End-to-end acceptance checks; each prints one PASS/FAIL line (run with -s to see them)."""
import pytest

from ridgekit import verify

RESULTS = {}


@pytest.mark.parametrize("number", sorted(verify.CHECKS))
def test_criterion(number):
    check = verify.CHECKS[number]()
    RESULTS[number] = check
    print(check.line())
    for key, value in check.details.items():
        print(f"    {key}: {value}")
    assert check.passed, check.details


def test_summary(capsys):
    missing = sorted(set(verify.CHECKS) - set(RESULTS))
    with capsys.disabled():
        print()
        for number in sorted(RESULTS):
            print(RESULTS[number].line())
    assert not missing, f"criteria not run: {missing}"
    assert all(c.passed for c in RESULTS.values())
