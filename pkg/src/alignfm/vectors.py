"""Sparse nonnegative feature vectors shared by the ESP and CGK embeddings."""

from __future__ import annotations

from collections.abc import Iterable, Mapping

import numpy as np


class CharacteristicVector:
    """Sparse vector stored as sorted feature ids and strictly positive values.

    Feature ids are 0-based. ``dim`` is the size of the feature space the
    vector lives in (dictionary size for ESP, ``L_out * (|alphabet| + 1)`` for
    CGK); it is informational and only used for range checks.
    """

    __slots__ = ("indices", "values", "dim")

    def __init__(self, indices, values, dim: int | None = None):
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if indices.ndim != 1 or indices.shape != values.shape:
            raise ValueError("indices and values must be 1-d arrays of equal length")
        if indices.size:
            order = np.argsort(indices, kind="stable")
            indices, values = indices[order], values[order]
            if np.any(np.diff(indices) == 0):
                raise ValueError("duplicate feature ids")
            if indices[0] < 0:
                raise ValueError("negative feature id")
        if np.any(values <= 0) or not np.all(np.isfinite(values)):
            raise ValueError("stored values must be finite and strictly positive")
        if dim is None:
            dim = int(indices[-1]) + 1 if indices.size else 0
        elif indices.size and indices[-1] >= dim:
            raise ValueError(f"feature id {indices[-1]} out of range for dim {dim}")
        self.indices = indices
        self.values = values
        self.dim = int(dim)
        self.indices.setflags(write=False)
        self.values.setflags(write=False)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float], dim: int | None = None):
        items = [(k, v) for k, v in mapping.items() if v != 0]
        if not items:
            return cls(np.empty(0, np.int64), np.empty(0), dim)
        keys, vals = zip(*items)
        return cls(np.fromiter(keys, np.int64, len(keys)), np.fromiter(vals, np.float64, len(vals)), dim)

    @classmethod
    def from_dense(cls, dense) -> CharacteristicVector:
        dense = np.asarray(dense, dtype=np.float64)
        idx = np.flatnonzero(dense)
        return cls(idx, dense[idx], dense.size)

    def with_dim(self, dim: int) -> CharacteristicVector:
        return CharacteristicVector(self.indices, self.values, dim)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def to_dict(self) -> dict[int, float]:
        return dict(zip(self.indices.tolist(), self.values.tolist()))

    def to_dense(self, dim: int | None = None) -> np.ndarray:
        out = np.zeros(self.dim if dim is None else dim)
        out[self.indices] = self.values
        return out

    def __eq__(self, other):
        if not isinstance(other, CharacteristicVector):
            return NotImplemented
        return np.array_equal(self.indices, other.indices) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.indices.tobytes(), self.values.tobytes()))

    def __repr__(self):
        return f"CharacteristicVector(nnz={self.nnz}, dim={self.dim}, {self.to_dict()!r})"


def common_dim(vectors: Iterable[CharacteristicVector]) -> int:
    return max((v.dim for v in vectors), default=0)
