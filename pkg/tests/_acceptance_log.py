"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def record(n: int, title: str, ok: bool, detail: str = "") -> bool:
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {title}"
    if detail:
        line += f" [{detail}]"
    LINES.append(line)
    print(line)
    return ok
