"""Output files: scalar-series CSVs, wide probability CSVs, binary snapshots, manifests.

Numbers in CSVs use 17 significant digits (``format(x, '.17g')``), which
round-trips float64 exactly and does not depend on the locale.

Snapshot layout (little endian): ``uint64 rank``, ``rank`` x ``uint64`` shape,
then the complex entries in C order as interleaved (real, imaginary) float64.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import SpinGasError

MANIFEST = "manifest.json"


class OutputError(SpinGasError, OSError):
    exit_code = 5


def _fmt(x) -> str:
    return format(float(x), ".17g")


def prepare_output_dir(out, force: bool = False) -> Path:
    """Create ``out``; refuse to reuse a directory holding a manifest unless ``force``."""
    out = Path(out)
    if (out / MANIFEST).exists() and not force:
        raise OutputError(f"{out / MANIFEST} exists; use --force to overwrite")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


def write_series_csv(path, steps, values, name: str = "value") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", name])
        for t, v in zip(steps, values):
            w.writerow([int(t), _fmt(v)])


def read_series_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return (np.array([int(r[0]) for r in rows], dtype=np.int64),
            np.array([float(r[1]) for r in rows]))


def write_matrix_csv(path, steps, matrix, prefix: str = "p") -> None:
    """Wide CSV: ``step, p1, ..., pN`` (1-based column labels)."""
    matrix = np.asarray(matrix)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step"] + [f"{prefix}{k + 1}" for k in range(matrix.shape[1])])
        for t, row in zip(steps, matrix):
            w.writerow([int(t)] + [_fmt(v) for v in row])


def read_matrix_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return (np.array([int(r[0]) for r in rows], dtype=np.int64),
            np.array([[float(x) for x in r[1:]] for r in rows]))


def write_snapshot(path, array) -> None:
    a = np.ascontiguousarray(array, dtype=np.complex128)
    header = np.array([a.ndim, *a.shape], dtype="<u8")
    body = np.empty(a.size * 2, dtype="<f8")
    body[0::2] = a.real.ravel()
    body[1::2] = a.imag.ravel()
    try:
        with open(path, "wb") as fh:
            fh.write(header.tobytes())
            fh.write(body.tobytes())
    except OSError as exc:
        raise OutputError(f"cannot write snapshot {path}: {exc.strerror}") from exc


def read_snapshot(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    rank = int(np.frombuffer(raw[:8], dtype="<u8")[0])
    shape = tuple(int(x) for x in np.frombuffer(raw[8:8 + 8 * rank], dtype="<u8"))
    body = np.frombuffer(raw[8 + 8 * rank:], dtype="<f8")
    if body.size != 2 * int(np.prod(shape)):
        raise OutputError(f"{path}: snapshot size does not match its header {shape}")
    return (body[0::2] + 1j * body[1::2]).reshape(shape)


def write_manifest(out, manifest: dict) -> Path:
    path = Path(out) / MANIFEST
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(out) -> dict:
    return json.loads((Path(out) / MANIFEST).read_text())
