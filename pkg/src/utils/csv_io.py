"""
CSV utility functions for tables, trajectories and radial profiles
"""
import csv
import os
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.errors import ProfileFormatError

logger = logging.getLogger(__name__)

PROFILE_HEADER = ['r', 'P0', 'u0']


def write_table(path: str, header: Sequence[str], columns: Sequence[np.ndarray]) -> str:
    """
    Write equally long columns as a comma separated table

    Values are printed with 17 significant digits so that they round-trip
    exactly. Returns the path written.
    """
    arrays = [np.asarray(col, dtype=float).ravel() for col in columns]
    if len(arrays) != len(header):
        raise ValueError(f"Got {len(arrays)} columns for {len(header)} header fields")
    lengths = {a.size for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"Columns have different lengths: {sorted(lengths)}")

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    table = np.column_stack(arrays) if arrays[0].size else np.empty((0, len(arrays)))
    np.savetxt(path, table, fmt='%.17g', delimiter=',', header=','.join(header),
               comments='', newline='\n')
    logger.debug(f"Wrote {table.shape[0]} rows to {path}")
    return path


def read_table(path: str) -> Dict[str, np.ndarray]:
    """Read a numeric CSV with a header row into a column dictionary"""
    data = np.genfromtxt(path, delimiter=',', names=True, dtype=float, encoding='utf-8')
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


def read_profile_csv(path: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Read an ``r,P0,u0`` profile file

    Args:
        path: CSV file with a header row

    Returns:
        Tuple of (r, P0, u0) arrays

    Raises:
        ProfileFormatError: On a missing header, a short row or a
            non-numeric field; the message names the offending line.
    """
    if not os.path.exists(path):
        raise ProfileFormatError(f"Profile file not found: {path}")

    rows: List[Tuple[float, float, float]] = []
    with open(path, 'r', newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise ProfileFormatError("empty file", line=1)
        if [h.strip() for h in header] != PROFILE_HEADER:
            raise ProfileFormatError(f"expected header {','.join(PROFILE_HEADER)}, got {','.join(header)}", line=1)

        for line_no, row in enumerate(reader, start=2):
            if not row or all(not field.strip() for field in row):
                continue
            if len(row) != len(PROFILE_HEADER):
                raise ProfileFormatError(f"expected {len(PROFILE_HEADER)} fields, got {len(row)}", line=line_no)
            try:
                values = tuple(float(field) for field in row)
            except ValueError:
                raise ProfileFormatError(f"non-numeric field in {row}", line=line_no)
            if not all(np.isfinite(values)):
                raise ProfileFormatError(f"non-finite value in {row}", line=line_no)
            rows.append(values)

    if len(rows) < 2:
        raise ProfileFormatError("a profile needs at least two nodes")

    table = np.array(rows, dtype=float)
    return table[:, 0], table[:, 1], table[:, 2]


def write_profile_csv(path: str, r: np.ndarray, P0: np.ndarray, u0: np.ndarray) -> str:
    """Write an ``r,P0,u0`` profile file"""
    return write_table(path, PROFILE_HEADER, [r, P0, u0])
