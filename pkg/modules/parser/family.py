"""
family.py - p-value tables and correlation-matrix files

Reads the flat delimited tables used by the mtp and dpmtp commands
(columns id, label, p and an optional weight; the delimiter is sniffed) and
whitespace- or comma-separated correlation matrices for fixed-correlation runs.
A study file is accepted wherever a p-value table is, using its observed
p-values.

Changes:
- Initial implementation on top of pandas
- Row numbers in errors count the header as line 1
- Study files accepted as p-value sources
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd

from modules.core.correlation import CorrelationMatrix
from modules.core.errors import MtpPowerError, SchemaError
from modules.parser.study import load_study
from modules.procedures.mtp import PValueFamily, normalize_weights

logger = logging.getLogger("mtppower.parser")

_P_COLUMNS = ("p", "p_value", "pvalue", "observed_p")
_STUDY_SUFFIXES = (".yaml", ".yml", ".study")


@dataclass
class FamilyTable:
    """
    A p-value table as read from disk.

    Attributes:
        ids (list): Test identifiers
        labels (list): Test labels
        values (numpy.ndarray): p-values
        weights (numpy.ndarray, optional): Raw weights, if the table has them
    """

    ids: List
    labels: List[str]
    values: np.ndarray
    weights: Optional[np.ndarray] = None

    def family(self, weighted=True) -> PValueFamily:
        """PValueFamily with normalized weights (equal weights if none or weighted=False)."""
        weights = normalize_weights(self.weights) if (weighted and self.weights is not None) else None
        return PValueFamily(self.values, weights, self.ids)

    def __len__(self):
        return len(self.ids)


def _row_line(index):
    return int(index) + 2


def parse_family_frame(frame: pd.DataFrame, source="<table>") -> FamilyTable:
    """
    Validate a DataFrame holding a p-value table.

    Raises:
        SchemaError: On missing columns, empty tables or invalid cells
    """
    frame = frame.rename(columns=lambda c: str(c).strip().lower())
    if frame.empty:
        raise SchemaError("p-value table has no rows", line=2, source=source)
    p_column = next((c for c in _P_COLUMNS if c in frame.columns), None)
    if p_column is None:
        raise SchemaError(f"missing p-value column (one of {', '.join(_P_COLUMNS)})", line=1, source=source)

    values = pd.to_numeric(frame[p_column], errors="coerce")
    bad = values.isna() | (values < 0) | (values > 1)
    if bad.any():
        index = bad.idxmax()
        raise SchemaError(f"invalid p-value '{frame[p_column][index]}'", line=_row_line(index), source=source)

    if "id" in frame.columns:
        ids = pd.to_numeric(frame["id"], errors="coerce")
        if ids.isna().any():
            index = ids.isna().idxmax()
            raise SchemaError(f"invalid id '{frame['id'][index]}'", line=_row_line(index), source=source)
        ids = [int(i) for i in ids]
        duplicated = pd.Series(ids).duplicated()
        if duplicated.any():
            index = duplicated.idxmax()
            raise SchemaError(f"duplicate id {ids[index]}", line=_row_line(index), source=source)
    else:
        ids = list(range(1, len(frame) + 1))

    if "label" in frame.columns:
        labels = [str(v) if not pd.isna(v) else f"Test {i}" for v, i in zip(frame["label"], ids)]
    else:
        labels = [f"Test {i}" for i in ids]

    weights = None
    if "weight" in frame.columns:
        weights = pd.to_numeric(frame["weight"], errors="coerce")
        bad = weights.isna() | (weights < 0)
        if bad.any():
            index = bad.idxmax()
            raise SchemaError(f"invalid weight '{frame['weight'][index]}'", line=_row_line(index), source=source)
        weights = weights.to_numpy(dtype=float)

    return FamilyTable(ids, labels, values.to_numpy(dtype=float), weights)


def read_family_table(path) -> FamilyTable:
    """
    Read a delimited p-value table, or the observed p-values of a study file.

    Args:
        path (str): Table or study file

    Returns:
        FamilyTable: The parsed table
    """
    if str(path).lower().endswith(_STUDY_SUFFIXES):
        return family_from_study(path)
    try:
        frame = pd.read_csv(path, sep=None, engine="python", skipinitialspace=True, comment="#")
    except FileNotFoundError:
        raise SchemaError("file not found", source=str(path))
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError, csv.Error) as e:
        raise SchemaError(f"unreadable table: {e}", source=str(path))
    logger.debug(f"Read {len(frame)} rows from {path}")
    return parse_family_frame(frame, source=str(path))


def family_from_study(path) -> FamilyTable:
    """Observed p-values (and weights) of a study file as a FamilyTable."""
    study = load_study(path)
    missing = [t.id for t in study.tests if t.observed_p is None]
    if missing:
        raise SchemaError(f"tests {missing} have no observed_p", source=str(path))
    weights = None
    if all(t.weight is not None for t in study.tests):
        weights = np.array([t.weight for t in study.tests], dtype=float)
    return FamilyTable(
        ids=[t.id for t in study.tests],
        labels=[t.label if t.label is not None else f"Test {t.id}" for t in study.tests],
        values=np.array([t.observed_p for t in study.tests], dtype=float),
        weights=weights,
    )


def read_correlation_matrix(path) -> CorrelationMatrix:
    """
    Read a square correlation matrix separated by commas and/or whitespace.

    Raises:
        SchemaError: If the file is not a valid correlation matrix
    """
    if not os.path.exists(path):
        raise SchemaError("file not found", source=str(path))
    try:
        frame = pd.read_csv(path, sep=r"[,\s]+", engine="python", header=None, comment="#")
        entries = frame.dropna(axis=1, how="all").to_numpy(dtype=float)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise SchemaError(f"unreadable matrix: {e}", source=str(path))
    try:
        return CorrelationMatrix(entries)
    except MtpPowerError as e:
        raise SchemaError(str(e), source=str(path))
