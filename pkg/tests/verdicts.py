"""Collected acceptance verdicts, printed at the end of the pytest run."""

LINES: list[str] = []


def record(number: int, title: str, failures: list[str], detail: str = "") -> str:
    status = "PASS" if not failures else "FAIL"
    line = f"{status} criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    if failures:
        line += " :: " + "; ".join(failures)
    LINES.append(line)
    print(line)
    return line
