"""Collects one verdict line per acceptance criterion for the terminal summary."""

VERDICTS: dict[int, str] = {}


def record(number: int, title: str, passed: bool, detail: str) -> bool:
    line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    VERDICTS[number] = line
    print(line)
    return passed
