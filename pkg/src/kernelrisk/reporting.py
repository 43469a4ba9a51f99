"""CSV and plain-text table output shared by the harness and the CLI."""

from __future__ import annotations

import csv
import io
from pathlib import Path

__all__ = ["write_csv", "format_csv", "format_table"]


def format_csv(header: list[str], rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(path: str | Path, header: list[str], rows: list[tuple]) -> None:
    Path(path).write_text(format_csv(header, rows), encoding="utf-8")


def format_table(header: list[str], rows: list[tuple],
                 precision: int = 6) -> str:
    """Aligned plain-text table; floats rendered at the given precision."""

    def cell(v) -> str:
        if isinstance(v, float):
            return f"{v:.{precision}g}"
        return str(v)

    str_rows = [[cell(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in str_rows)) if str_rows
              else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in str_rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
