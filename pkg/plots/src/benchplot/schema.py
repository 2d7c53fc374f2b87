"""CSV loading with hard schema validation.

The plotting side shares no code with the solver package: these readers pin
the documented CSV contracts and fail loudly, naming the offending column.
"""

from __future__ import annotations

import csv


class SchemaError(ValueError):
    """Input CSV violates the documented schema; the message names the column."""


def read_rows(paths: list[str], required: dict[str, type]) -> list[dict]:
    """Read and concatenate CSVs, validating presence and type of each column.

    `required` maps column name -> parser (float, int, str).  Extra columns are
    carried through untouched; a missing column or an unparsable cell raises
    SchemaError naming the column.
    """
    rows: list[dict] = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            if header is None:
                raise SchemaError(f"{path}: empty CSV, no header line")
            for col in required:
                if col not in header:
                    raise SchemaError(f"{path}: missing required column '{col}'")
            for lineno, raw in enumerate(reader, start=2):
                row = dict(raw)
                for col, parse in required.items():
                    if parse is str:
                        continue
                    try:
                        row[col] = parse(raw[col])
                    except (TypeError, ValueError):
                        raise SchemaError(
                            f"{path}:{lineno}: column '{col}' is not numeric:"
                            f" {raw[col]!r}"
                        )
                rows.append(row)
    if not rows:
        raise SchemaError(f"no data rows in {', '.join(paths)}")
    return rows


CURVES_COLUMNS = {
    "method": str,
    "source": str,
    "param": str,
    "budget_m": float,
    "pct_optimal": float,
    "pct_std": float,
}

HIST_COLUMNS = {
    "source": str,
    "param": str,
    "bin_lo": float,
    "bin_hi": float,
    "count": float,
}

ACCEPT_COLUMNS = {
    "graph_id": str,
    "source": str,
    "param": str,
    "rep": str,
    "beta": float,
    "accepted": float,
}
