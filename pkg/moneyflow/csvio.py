"""Async CSV emission and ingestion of column tables.

Tables are ordered mappings of column name to a one-dimensional array. Numbers
are written with ``repr(float)``, the shortest decimal that round-trips, so
identical inputs produce byte-identical files and reading a file back recovers
every value exactly.

Example
-------
.. code-block:: python

    import asyncio
    import numpy as np
    from moneyflow.csvio import read_columns, write_columns

    async def main():
        await write_columns("out.csv", {"tau": np.arange(3) * 0.5, "rho": np.full(3, 0.5)})
        table = await read_columns("out.csv", required=["tau"])
        print(table["tau"])  # [0.  0.5 1. ]

    asyncio.run(main())
"""

import logging
import os
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
from rapcsv import UNIX_DIALECT, AsyncDictReader, Writer

from ._errors import ConfigError

logger = logging.getLogger(__name__)

PathLike = Union[str, "os.PathLike[str]"]
Columns = Mapping[str, Sequence[float]]


def format_number(value: float) -> str:
    """Shortest round-trip decimal form of ``value``."""
    return repr(float(value))


async def write_columns(path: PathLike, columns: Columns) -> int:
    """Write ``columns`` as a CSV table with a header row.

    Returns:
        The number of data rows written.

    Raises:
        ValueError: If the columns differ in length.
    """
    names = list(columns)
    arrays = [np.asarray(columns[name], dtype=float).ravel() for name in names]
    lengths = {a.size for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"columns differ in length: {dict(zip(names, (a.size for a in arrays)))}")
    count = lengths.pop() if lengths else 0

    body = [[format_number(a[i]) for a in arrays] for i in range(count)]
    return await write_table(path, names, body)


async def write_table(
    path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]
) -> int:
    """Write a header and pre-formatted string rows; returns the data row count."""
    table: List[List[str]] = [list(header)]
    table.extend(list(row) for row in rows)
    async with Writer(os.fspath(path), **UNIX_DIALECT) as writer:
        await writer.writerows(table)
    logger.debug("wrote %d rows x %d columns to %s", len(table) - 1, len(header), path)
    return len(table) - 1


async def read_columns(
    path: PathLike, required: Optional[Sequence[str]] = None
) -> Dict[str, np.ndarray]:
    """Read a CSV table written by :func:`write_columns` into float arrays.

    Raises:
        ConfigError: If a required column is missing or a cell is not a number.
    """
    reader = AsyncDictReader(os.fspath(path))
    values: Dict[str, List[float]] = {}
    line = 1
    async for row in reader:
        if not row:
            break
        line += 1
        for name, cell in row.items():
            try:
                values.setdefault(name, []).append(float(cell))
            except (TypeError, ValueError) as err:
                raise ConfigError(f"line {line}: {cell!r} is not a number", field=name) from err

    missing = [name for name in (required or ()) if name not in values]
    if missing:
        raise ConfigError(f"{path} lacks required columns {missing}", field=missing[0])
    return {name: np.array(cells, dtype=float) for name, cells in values.items()}
