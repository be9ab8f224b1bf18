"""Random Fourier features for the Laplacian kernel over L1.

Two maps with the same contract: the space-efficient map derives every
Cauchy projection coefficient on demand from a 2-wise independent hash with
two 64-bit words per input coordinate, the dense baseline stores all
``d * D / 2`` coefficients.

Both write ``sqrt(2/D) * (sin(s_i), cos(s_i))`` into output slots
``2i, 2i + 1`` where ``s_i`` is the projection of the input on the ``i``-th
random direction.
"""

from __future__ import annotations

import math
import struct
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, InputFormatError
from .vectors import CharacteristicVector

UMAX32 = 2**32 - 1
U_MIN = 2.0**-32
U_MAX = 1.0 - 2.0**-32

# rows (feature pairs) and columns (nonzeros) per working block; fixed so
# that working memory does not depend on D once D/2 >= ROW_CHUNK
ROW_CHUNK = 64
COL_CHUNK = 1024

_MAGIC = b"SFMS"
_VERSION = 1
_SHIFT = np.uint64(32)


@dataclass(frozen=True, eq=False)
class HashSeeds:
    """The whole state of the space-efficient map: two words per coordinate and beta."""

    array1: np.ndarray
    array2: np.ndarray
    beta: float

    def __post_init__(self):
        a1 = np.ascontiguousarray(self.array1, dtype=np.uint64)
        a2 = np.ascontiguousarray(self.array2, dtype=np.uint64)
        if a1.ndim != 1 or a1.shape != a2.shape:
            raise ValueError("seed arrays must be 1-d with equal length")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ContractError(f"beta must be positive and finite, got {self.beta}")
        a1.setflags(write=False)
        a2.setflags(write=False)
        object.__setattr__(self, "array1", a1)
        object.__setattr__(self, "array2", a2)
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def generate(cls, d: int, beta: float, rng: np.random.Generator) -> HashSeeds:
        a1 = rng.integers(0, 2**64, size=d, dtype=np.uint64)
        a2 = rng.integers(0, 2**64, size=d, dtype=np.uint64)
        return cls(a1, a2, beta)

    @property
    def d(self) -> int:
        return self.array1.size

    @property
    def nbytes(self) -> int:
        return self.array1.nbytes + self.array2.nbytes

    def with_beta(self, beta: float) -> HashSeeds:
        return HashSeeds(self.array1, self.array2, beta)

    def __eq__(self, other):
        if not isinstance(other, HashSeeds):
            return NotImplemented
        return (
            self.beta == other.beta
            and np.array_equal(self.array1, other.array1)
            and np.array_equal(self.array2, other.array2)
        )

    def save(self, path) -> None:
        header = _MAGIC + struct.pack("<IQd", _VERSION, self.d, self.beta)
        data = header + self.array1.astype("<u8").tobytes() + self.array2.astype("<u8").tobytes()
        Path(path).write_bytes(data)

    @classmethod
    def load(cls, path) -> HashSeeds:
        data = Path(path).read_bytes()
        if data[:4] != _MAGIC:
            raise InputFormatError("not a seeds file (bad magic)", path)
        version, d, beta = struct.unpack_from("<IQd", data, 4)
        if version != _VERSION:
            raise InputFormatError(f"unsupported seeds version {version}", path)
        off = 4 + struct.calcsize("<IQd")
        if len(data) != off + 16 * d:
            raise InputFormatError("seeds file has the wrong size", path)
        a1 = np.frombuffer(data, "<u8", d, off)
        a2 = np.frombuffer(data, "<u8", d, off + 8 * d)
        return cls(a1.astype(np.uint64), a2.astype(np.uint64), beta)


@dataclass(frozen=True, eq=False)
class DenseProjection:
    """Explicit Cauchy(0, 1/beta) directions for the baseline map.

    Stored column-major with respect to the directions: ``matrix[j, i]`` is
    coordinate ``j`` of direction ``i``, so ``rows`` is the ``(D/2, d)`` view.
    """

    matrix: np.ndarray
    beta: float

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def D(self) -> int:
        return 2 * self.matrix.shape[1]

    @property
    def rows(self) -> np.ndarray:
        return self.matrix.T

    @property
    def nbytes(self) -> int:
        return self.matrix.nbytes


def _check_D(D: int) -> int:
    D = int(D)
    if D < 2 or D % 2:
        raise ContractError(f"D must be an even integer >= 2, got {D}")
    return D


def sample_dense_projection(d: int, D: int, beta: float, rng: np.random.Generator) -> DenseProjection:
    """i.i.d. ``tan(pi (U - 1/2)) / beta`` entries, generated in place."""
    D = _check_D(D)
    if not beta > 0:
        raise ContractError("beta must be positive")
    m = rng.random((d, D // 2))
    m -= 0.5
    m *= math.pi
    np.tan(m, out=m)
    m /= beta
    return DenseProjection(m, float(beta))


def _uniform_block(a1: np.ndarray, a2: np.ndarray, i: np.ndarray) -> np.ndarray:
    """u for rows ``i`` (1-based feature-pair ids, uint64 column) and the given seed words."""
    f = a2 * i  # wraps mod 2**64
    f += a1
    f >>= _SHIFT
    u = f.astype(np.float64)
    u /= UMAX32
    np.clip(u, U_MIN, U_MAX, out=u)
    return u


def _cauchy_from_uniform(u: np.ndarray, beta: float) -> np.ndarray:
    u -= 0.5
    u *= math.pi
    np.tan(u, out=u)
    u /= beta
    return u


def _check_coord(j: int, seeds: HashSeeds) -> int:
    if not 0 <= j < seeds.d:
        raise ContractError(f"coordinate {j} out of range for d={seeds.d}")
    return j


def func_f(i: int, j: int, seeds: HashSeeds) -> float:
    """Uniform value in [0, 1]: top 32 bits of ``array1[j] + array2[j] * i`` over 2**32 - 1.

    ``i`` is the 1-based feature-pair index, ``j`` the 0-based coordinate.
    """
    _check_coord(j, seeds)
    if i < 1:
        raise ContractError("feature-pair index starts at 1")
    f = (int(seeds.array1[j]) + int(seeds.array2[j]) * i) & 0xFFFFFFFFFFFFFFFF
    return (f >> 32) / UMAX32


def func_h(i: int, j: int, seeds: HashSeeds) -> float:
    """Cauchy(0, 1/beta) coordinate ``j`` of the ``i``-th random direction."""
    u = min(max(func_f(i, j, seeds), U_MIN), U_MAX)
    return math.tan(math.pi * (u - 0.5)) / seeds.beta


class _HashedCoefficients:
    def __init__(self, seeds: HashSeeds):
        self.seeds = seeds

    def prepare(self, cols: np.ndarray):
        return self.seeds.array1[cols][None, :], self.seeds.array2[cols][None, :]

    def block(self, prepared, i0: int, i1: int) -> np.ndarray:
        a1, a2 = prepared
        i = np.arange(i0 + 1, i1 + 1, dtype=np.uint64)[:, None]
        return _cauchy_from_uniform(_uniform_block(a1, a2, i), self.seeds.beta)


class _DenseCoefficients:
    def __init__(self, proj: DenseProjection):
        self.proj = proj

    def prepare(self, cols: np.ndarray):
        return cols

    def block(self, cols, i0: int, i1: int) -> np.ndarray:
        return self.proj.matrix[cols, i0:i1].T


def _groups(vectors: Sequence[CharacteristicVector]):
    """Yield ``(rows, col_slices)`` batches of at most COL_CHUNK stored values.

    A batch is either several whole vectors or one slice of a long vector;
    zero vectors are skipped (their projection is 0).
    """
    rows: list[int] = []
    used = 0
    for r, v in enumerate(vectors):
        nnz = v.nnz
        if nnz == 0:
            continue
        if nnz > COL_CHUNK:
            if rows:
                yield rows, None
                rows, used = [], 0
            for start in range(0, nnz, COL_CHUNK):
                yield [r], slice(start, min(nnz, start + COL_CHUNK))
            continue
        if used + nnz > COL_CHUNK:
            yield rows, None
            rows, used = [], 0
        rows.append(r)
        used += nnz
    if rows:
        yield rows, None


def _project(vectors, D: int, coeffs, d: int, out: np.ndarray | None) -> np.ndarray:
    D = _check_D(D)
    half = D // 2
    n = len(vectors)
    for v in vectors:
        if v.nnz and v.indices[-1] >= d:
            raise ContractError(f"vector has feature id {v.indices[-1]} but the map covers d={d}")
    if out is None:
        out = np.zeros((n, D))
    else:
        if out.shape != (n, D) or out.dtype != np.float64:
            raise ContractError(f"output buffer must be float64 of shape {(n, D)}")
        out[...] = 0.0
    acc = out[:, 0::2]  # projections accumulate in the sine slots
    for rows, part in _groups(vectors):
        if part is None:
            cols = np.concatenate([vectors[r].indices for r in rows])
            weights = np.concatenate([vectors[r].values for r in rows])
        else:
            cols = vectors[rows[0]].indices[part]
            weights = vectors[rows[0]].values[part]
        starts = np.cumsum([0] + [vectors[r].nnz for r in rows[:-1]]) if part is None else np.array([0])
        prepared = coeffs.prepare(cols)
        row_idx = np.asarray(rows)
        for i0 in range(0, half, ROW_CHUNK):
            i1 = min(half, i0 + ROW_CHUNK)
            block = coeffs.block(prepared, i0, i1)  # never aliases stored state
            block *= weights
            s = np.add.reduceat(block, starts, axis=1)
            acc[row_idx, i0:i1] += s.T
    scale = math.sqrt(2.0 / D)
    for r0 in range(0, n, ROW_CHUNK):
        sl = slice(r0, min(n, r0 + ROW_CHUNK))
        np.cos(acc[sl], out=out[sl, 1::2])
        np.sin(acc[sl], out=acc[sl])
        out[sl] *= scale
    return out


def sfm_transform(
    vectors: Sequence[CharacteristicVector], D: int, seeds: HashSeeds, out: np.ndarray | None = None
) -> np.ndarray:
    """Project a batch with the hashed map; row ``r`` of the result is ``z(vectors[r])``.

    Time is O(nnz * D) per vector; memory beyond ``seeds`` and ``out`` is a
    constant-size working block.
    """
    return _project(vectors, D, _HashedCoefficients(seeds), seeds.d, out)


def sfm_project(v: CharacteristicVector, D: int, seeds: HashSeeds) -> np.ndarray:
    return sfm_transform([v], D, seeds)[0]


def fm_transform(
    vectors: Sequence[CharacteristicVector], proj: DenseProjection, out: np.ndarray | None = None
) -> np.ndarray:
    return _project(vectors, proj.D, _DenseCoefficients(proj), proj.d, out)


def fm_project(v: CharacteristicVector, proj: DenseProjection) -> np.ndarray:
    return fm_transform([v], proj)[0]


def sfm_inner_products(
    x: CharacteristicVector,
    y: CharacteristicVector,
    D: int,
    beta: float,
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """``z(x) . z(y)`` under ``trials`` independent draws of hash seeds.

    Only the seed words of coordinates in the union of supports influence the
    result, so both vectors are re-indexed onto that union and seeds are drawn
    for it alone.
    """
    cols = np.union1d(x.indices, y.indices)
    xs = CharacteristicVector(np.searchsorted(cols, x.indices), x.values, cols.size)
    ys = CharacteristicVector(np.searchsorted(cols, y.indices), y.values, cols.size)
    out = np.empty((2, _check_D(D)))
    result = np.empty(trials)
    for t in range(trials):
        z = sfm_transform([xs, ys], D, HashSeeds.generate(cols.size, beta, rng), out=out)
        result[t] = z[0] @ z[1]
    return result
