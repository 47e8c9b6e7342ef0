# src/persistence/tables.py

"""
CSV writers for every tabular artifact (manifest, loss trace, quality
report, ablation table, motion-group summary).

Output is byte-stable: fixed float format, "\n" line endings, no index.
"""

from pathlib import Path
from typing import Iterable, Optional

import pandas as pd

from src.utils.errors import ContractError

LOSS_TRACE_COLUMNS = ["step", "epoch", "batch", "lr", "loss"]


def write_table(
    df: pd.DataFrame,
    path: Path,
    float_format: Optional[str] = None,
    footnotes: Iterable[str] = (),
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = df.to_csv(index=False, float_format=float_format, lineterminator="\n", na_rep="nan")
    for note in footnotes:
        text += f"# {note}\n"
    path.write_text(text, encoding="utf-8")
    return path


def read_table(path: Path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise ContractError(f"table not found: {path}")
    return pd.read_csv(path, comment="#")


def loss_trace_frame(rows: Iterable[dict]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=LOSS_TRACE_COLUMNS)


def write_loss_trace(rows: Iterable[dict], path: Path) -> Path:
    df = loss_trace_frame(rows)
    return write_table(df, path, float_format="%.12e")
