"""Small CSV/JSON writers shared by the solvers and the harness."""

import csv
import json
import math
import os
import tempfile

import numpy as np


def fmt(value):
    """Six significant digits in scientific notation; blanks for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.5E}"


def _atomic_write(path, write):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows):
    """Write ``rows`` under ``header``, formatting floats with :func:`fmt`."""

    def write(fh):
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])

    return _atomic_write(path, write)


def write_json(path, payload):
    def write(fh):
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")

    return _atomic_write(path, write)
