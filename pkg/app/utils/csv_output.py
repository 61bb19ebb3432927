from pathlib import Path
from typing import Any, Mapping, Optional

import pandas as pd

# 15 significant digits, period decimal separator, LF line ends
FLOAT_FORMAT = "%.15g"


def table_to_csv(table: pd.DataFrame, path: Optional[Path] = None) -> str:
    """Render ``table`` as CSV; also write it to ``path`` when given."""
    text = table.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def row_to_csv(row: Mapping[str, Any]) -> str:
    """Header line plus one data row."""
    return table_to_csv(pd.DataFrame([dict(row)]))
