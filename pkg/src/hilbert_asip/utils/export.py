"""Write simulation outputs and reports to disk in stable formats."""

import csv
import json
import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

_logger = logging.getLogger(__name__)


def _json_default(obj: Any) -> Any:  # noqa: ANN401
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    msg = f"Object of type {type(obj).__name__} is not JSON serializable"
    raise TypeError(msg)


def dumps(obj: Any) -> str:  # noqa: ANN401
    """Serialize to JSON with sorted keys and two-space indent.

    Output is byte-stable for equal inputs.

    :param obj: JSON-compatible object (numpy scalars and arrays are accepted)
    :return: JSON text, newline-terminated
    """
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def write_json(outfile: Path, obj: Any) -> Path:  # noqa: ANN401
    """Write a JSON document.

    :param outfile: destination file
    :param obj: JSON-compatible object
    :return: the written path
    """
    outfile.write_text(dumps(obj))
    _logger.debug("Wrote %s", outfile)
    return outfile


def write_csv(outfile: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a table with a header row.

    :param outfile: destination file
    :param header: column names
    :param rows: table rows
    :return: the written path
    """
    with outfile.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    _logger.debug("Wrote %s", outfile)
    return outfile


def _cell(value: Any) -> Any:  # noqa: ANN401
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return ""
    return value


def write_path_csv(outfile: Path, path: np.ndarray) -> Path:
    """Export a simulated path, one row per time index.

    The header row is ``t,c1,...,cD``; ``t`` counts from 0.

    :param outfile: destination file
    :param path: array of shape ``(n, D)``
    :return: the written path
    """
    header = ["t", *(f"c{k}" for k in range(1, path.shape[1] + 1))]
    rows = ([t, *row.tolist()] for t, row in enumerate(path))
    return write_csv(outfile, header, rows)
