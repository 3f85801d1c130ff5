"""CSV and JSON report emission.

CSV reports start with ``# key=value`` header lines (values JSON-encoded),
followed by one or more tables, each with its own header row and separated
by a blank line.  JSON reports are a single object: ``{"header": ...,
<section>: [row, ...], ...}``.  Both use LF line endings and fixed column
order so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Dict, Sequence, Tuple

from . import __version__

Section = Tuple[Sequence[str], Sequence[dict]]


def render(fmt: str, header: dict, sections: Dict[str, Section]) -> str:
    header = {"artifact_version": __version__, **header}
    if fmt == "json":
        doc = {"header": header}
        for name, (columns, rows) in sections.items():
            doc[name] = [{c: row.get(c) for c in columns} for row in rows]
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO(newline="")
    for key, value in header.items():
        buf.write(f"# {key}={json.dumps(value, sort_keys=True)}\n")
    first = True
    for name, (columns, rows) in sections.items():
        if not first:
            buf.write("\n")
        first = False
        writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n",
                                extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return buf.getvalue()


def parse_csv_sections(text: str) -> list:
    """Split a CSV report back into lists of row dicts (header lines dropped)."""
    body = "\n".join(line for line in text.split("\n") if not line.startswith("#"))
    tables = []
    for chunk in body.strip("\n").split("\n\n"):
        tables.append(list(csv.DictReader(io.StringIO(chunk))))
    return tables
