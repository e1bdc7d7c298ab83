_VERDICTS: dict[int, str] = {}


def record(number: int, passed: bool, detail: str = "") -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}" + (f"  {detail}" if detail else "")
    _VERDICTS[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[k])
