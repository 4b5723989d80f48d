import itertools

import pytest

# criterion label ("1a", "4", ...) -> (passed, detail); filled by the acceptance suite
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def _number(label: str) -> int:
    return int(label.rstrip("abcdefgh"))


@pytest.fixture
def record_criterion():
    def record(label: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_RESULTS[label] = (bool(passed), detail)
        print(f"CRITERION {label}: {'PASS' if passed else 'FAIL'} - {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    labels = sorted(ACCEPTANCE_RESULTS, key=lambda s: (_number(s), s))
    for number, group in itertools.groupby(labels, key=_number):
        parts = list(group)
        passed = all(ACCEPTANCE_RESULTS[p][0] for p in parts)
        detail = "; ".join(
            (f"[{p}] " if len(parts) > 1 else "")
            + f"{'pass' if ACCEPTANCE_RESULTS[p][0] else 'FAIL'}: {ACCEPTANCE_RESULTS[p][1]}"
            for p in parts)
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
