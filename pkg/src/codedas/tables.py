"""CSV emission and ingestion with reproducible formatting.

All floating-point values are serialized with 17 significant digits, enough
to round-trip float64 exactly, so identical data always produces identical
bytes.
"""

import numpy as np


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return "%d" % v
    return "%.17g" % v


def write_csv(path, columns):
    """columns: ordered dict-like of name -> 1-d array (equal lengths)."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    if arrays:
        length = arrays[0].shape[0]
        for n, a in zip(names, arrays):
            if a.ndim != 1 or a.shape[0] != length:
                raise ValueError(f"column {n!r} is not 1-d of common length")
    lines = [",".join(names)]
    for row in range(arrays[0].shape[0] if arrays else 0):
        lines.append(",".join(format_value(a[row]) for a in arrays))
    data = "\n".join(lines) + "\n"
    with open(path, "w", newline="") as fh:
        fh.write(data)


def read_csv(path):
    """Read a CSV written by write_csv: dict of name -> float64 array."""
    with open(path, "r") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty CSV")
        names = header.split(",")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=np.float64)
        except ValueError as exc:
            raise ValueError(f"{path}: malformed CSV body: {exc}") from exc
    if data.size == 0:
        return {n: np.empty(0, dtype=np.float64) for n in names}
    if data.shape[1] != len(names):
        raise ValueError(
            f"{path}: {data.shape[1]} data columns vs {len(names)} header names"
        )
    return {n: data[:, i].copy() for i, n in enumerate(names)}
