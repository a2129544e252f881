"""Collects one verdict line per acceptance criterion for the run summary."""
LINES = {}


def report(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES[number] = line
    print(line)
    return line
