"""Plain-text serialization: spectral data, grid signals, result curves, manifests.

All CSV files use ``,`` as separator, ``.`` as decimal mark and a header row.
Floats are written with 17 significant digits so values round-trip exactly.
"""

import json
from pathlib import Path

import numpy as np

from .fourier import SpectralData

FLOAT_FMT = "%.17g"


def _write_columns(path, header, columns):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    try:
        np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt=FLOAT_FMT)
    except OSError as err:
        raise OSError(f"cannot write {path}: {err}") from err
    return path


def _read_columns(path, expected):
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    if header[: len(expected)] != list(expected):
        raise ValueError(f"{path}: expected header starting with {expected}, got {header}")
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, arr


def write_spectral(path, data):
    """One row per wavenumber: ``k, re, im``."""
    return _write_columns(path, ["k", "re", "im"], [data.wavenumbers, data.coeffs.real, data.coeffs.imag])


def read_spectral(path, kind="noisy"):
    _, arr = _read_columns(path, ["k", "re", "im"])
    k = arr[:, 0].astype(int)
    n = k.size
    if not np.array_equal(k, np.arange(-n // 2, n // 2)):
        raise ValueError(f"{path}: wavenumbers must run -N/2 .. N/2-1 in order")
    return SpectralData(arr[:, 1] + 1j * arr[:, 2], kind)


def write_signal(path, x, values):
    """Grid signal as ``x, value``."""
    return _write_columns(path, ["x", "value"], [x, values])


def read_signal(path):
    _, arr = _read_columns(path, ["x", "value"])
    return arr[:, 0], arr[:, 1]


def write_curve(path, x, truth, estimate, lower=None, upper=None):
    """Per-method result file ``x, truth, estimate[, lower, upper]``."""
    header = ["x", "truth", "estimate"]
    cols = [x, truth, estimate]
    if lower is not None:
        header += ["lower", "upper"]
        cols += [lower, upper]
    return _write_columns(path, header, cols)


def write_band(path, x, estimate, lower, upper):
    """MAP/credible-band file ``x, estimate, lower, upper``."""
    return _write_columns(path, ["x", "estimate", "lower", "upper"], [x, estimate, lower, upper])


def write_table(path, header, rows):
    """Write rows of mixed str/number values as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as err:
        raise OSError(f"cannot write {path}: {err}") from err
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


def write_manifest(path, manifest):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
