"""File formats: headerless data CSV, JSON reports, and the sample binary.

Data CSVs round-trip exactly: each float is written with its shortest
representation that parses back to the identical double.  The retained
sample stack spills to a little-endian binary with a 16-byte header
(magic "QGGM", then uint32 version, p, n_samples) followed by n_samples
p x p float64 matrices in row-major order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ArtifactError, ValidationError

__all__ = [
    "SAMPLES_MAGIC",
    "SAMPLES_VERSION",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_samples",
    "read_samples",
    "write_json",
    "read_json",
]

SAMPLES_MAGIC = b"QGGM"
SAMPLES_VERSION = 1


def write_matrix_csv(path, Y) -> None:
    """Headerless CSV, one row per line, shortest round-trip float repr."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise ValidationError("expected a 2-D array")
    lines = (",".join(repr(float(v)) for v in row) for row in Y)
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"expected data CSV at {path}")
    rows = []
    width = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ValidationError(
                    f"{path}: line {lineno} has {len(fields)} fields, expected {width}"
                )
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                col = next(
                    k + 1 for k, f in enumerate(fields)
                    if not _parses_as_float(f)
                )
                raise ValidationError(
                    f"{path}: line {lineno}, column {col}: not a number"
                ) from exc
    if not rows:
        raise ValidationError(f"{path}: empty data file")
    Y = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(Y)):
        bad = np.argwhere(~np.isfinite(Y))[0]
        raise ValidationError(
            f"{path}: non-finite value at line {bad[0] + 1}, column {bad[1] + 1}"
        )
    return Y


def _parses_as_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_samples(path, samples) -> None:
    """Spill a (n_samples, p, p) stack to the binary sample format."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
        raise ValidationError("samples must be a (n, p, p) stack")
    n, p, _ = samples.shape
    with open(path, "wb") as fh:
        fh.write(SAMPLES_MAGIC)
        fh.write(struct.pack("<III", SAMPLES_VERSION, p, n))
        fh.write(np.ascontiguousarray(samples).astype("<f8").tobytes())


def read_samples(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"expected sample binary at {path}")
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != SAMPLES_MAGIC:
        raise ValidationError(f"{path}: not a sample binary (bad magic)")
    version, p, n = struct.unpack("<III", raw[4:16])
    if version != SAMPLES_VERSION:
        raise ValidationError(f"{path}: unsupported sample format version {version}")
    expected = 16 + n * p * p * 8
    if len(raw) != expected:
        raise ValidationError(f"{path}: truncated sample binary")
    data = np.frombuffer(raw, dtype="<f8", offset=16)
    return data.reshape(n, p, p).astype(np.float64)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"expected JSON artifact at {path}")
    return json.loads(path.read_text())
