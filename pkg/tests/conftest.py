import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record and assert one acceptance criterion: ``criterion(num, name, ok, detail)``."""

    def check(num, name, ok, detail=""):
        _ACCEPTANCE.append((num, name, bool(ok), detail))
        print(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}  {detail}")
        assert ok, f"criterion {num} ({name}) failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}  {detail}")
