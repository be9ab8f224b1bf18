"""Text formats: sparse features, dense RFF rows, Gram matrices, error CSV."""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence

import numpy as np

from .errors import InputFormatError
from .vectors import CharacteristicVector


def format_number(x: float) -> str:
    """Shortest round-trip decimal; integral values lose the trailing ``.0``."""
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def _parse_label(tok: str, path, lineno: int) -> int:
    try:
        value = float(tok)
    except ValueError:
        raise InputFormatError(f"bad label {tok!r}", path, lineno) from None
    if value != int(value):
        raise InputFormatError(f"label {tok!r} is not an integer", path, lineno)
    return int(value)


def write_sparse(path, labels: Sequence[int], vectors: Sequence[CharacteristicVector]) -> None:
    """``label idx:val ...`` per line, 1-based ascending indices (LIBSVM style)."""
    with open(path, "w", encoding="ascii") as fh:
        for y, v in zip(labels, vectors, strict=True):
            items = " ".join(f"{i + 1}:{format_number(x)}" for i, x in zip(v.indices.tolist(), v.values.tolist()))
            fh.write(f"{int(y)} {items}\n" if items else f"{int(y)}\n")


def read_sparse(path, dim: int | None = None) -> tuple[np.ndarray, list[CharacteristicVector]]:
    labels, rows = [], []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            toks = line.split()
            if not toks:
                continue
            labels.append(_parse_label(toks[0], path, lineno))
            idx, val = [], []
            for tok in toks[1:]:
                k, sep, x = tok.partition(":")
                if not sep:
                    raise InputFormatError(f"expected idx:val, got {tok!r}", path, lineno)
                try:
                    k, x = int(k), float(x)
                except ValueError:
                    raise InputFormatError(f"bad entry {tok!r}", path, lineno) from None
                if k < 1 or (idx and k <= idx[-1]):
                    raise InputFormatError("indices must be 1-based and strictly ascending", path, lineno)
                idx.append(k - 1)
                val.append(x)
            rows.append((lineno, idx, val))
    if dim is None:
        dim = max((r[1][-1] + 1 for r in rows if r[1]), default=0)
    vectors = []
    for lineno, idx, val in rows:
        try:
            vectors.append(CharacteristicVector(idx, val, dim))
        except ValueError as exc:
            raise InputFormatError(str(exc), path, lineno) from None
    return np.array(labels, dtype=np.int64), vectors


def write_dense(path, labels: Sequence[int], features: np.ndarray, sparse: bool = False) -> None:
    """``label v1 ... vD`` per line, or ``label 1:v1 ... D:vD`` when ``sparse``."""
    features = np.asarray(features)
    with open(path, "w", encoding="ascii") as fh:
        for y, row in zip(labels, features, strict=True):
            vals = row.tolist()
            if sparse:
                body = " ".join(f"{k}:{format_number(x)}" for k, x in enumerate(vals, 1))
            else:
                body = " ".join(map(format_number, vals))
            fh.write(f"{int(y)} {body}\n")


def read_dense(path) -> tuple[np.ndarray, np.ndarray]:
    """Read either dense layout written by :func:`write_dense`."""
    labels, rows = [], []
    width = None
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            toks = line.split()
            if not toks:
                continue
            labels.append(_parse_label(toks[0], path, lineno))
            try:
                row = [float(t.rpartition(":")[2]) for t in toks[1:]]
            except ValueError:
                raise InputFormatError("non-numeric feature value", path, lineno) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputFormatError(f"expected {width} values, got {len(row)}", path, lineno)
            rows.append(row)
    return np.array(labels, dtype=np.int64), np.array(rows, dtype=np.float64).reshape(len(rows), width or 0)


def write_gram(path, matrix: np.ndarray) -> None:
    m = np.asarray(matrix)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{m.shape[0]}\n")
        for row in m.tolist():
            fh.write(" ".join(map(format_number, row)) + "\n")


def read_gram(path) -> np.ndarray:
    with open(path, encoding="ascii") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    try:
        n = int(lines[0])
        m = np.array([[float(t) for t in ln.split()] for ln in lines[1:]])
    except (IndexError, ValueError) as exc:
        raise InputFormatError(f"malformed Gram file ({exc})", path) from None
    if m.shape != (n, n):
        raise InputFormatError(f"expected a {n}x{n} matrix, got {m.shape}", path)
    return m


ERROR_FIELDS = ("method", "D", "beta", "mean_error", "std_error")


def write_error_csv(fh, rows: Iterable[dict]) -> None:
    writer = csv.DictWriter(fh, fieldnames=ERROR_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format_number(v) if isinstance(v, float) else v for k, v in row.items()})
