"""Exact kernels, the brute-force EDM oracle and approximation-error metrics."""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError
from .vectors import CharacteristicVector

ORACLE_MAX_LEN = 6
ORACLE_MAX_ALPHABET = 3


@dataclass(frozen=True)
class GramMatrix:
    matrix: np.ndarray
    beta: float
    source: str  # "exact", "sfm" or "fm"

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Gram matrix must be square")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def l1_distance(a: CharacteristicVector, b: CharacteristicVector) -> float:
    """Sum of ``|a_f - b_f|`` over the union of supports."""
    _, ia, ib = np.intersect1d(a.indices, b.indices, assume_unique=True, return_indices=True)
    only_a = np.ones(a.nnz, bool)
    only_a[ia] = False
    only_b = np.ones(b.nnz, bool)
    only_b[ib] = False
    return float(
        np.abs(a.values[ia] - b.values[ib]).sum() + a.values[only_a].sum() + b.values[only_b].sum()
    )


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta > 0 or not math.isfinite(beta):
        raise ContractError(f"beta must be a positive finite number, got {beta}")
    return beta


def laplacian_kernel(a: CharacteristicVector, b: CharacteristicVector, beta: float = 1.0) -> float:
    beta = _check_beta(beta)
    return math.exp(-l1_distance(a, b) / beta)


def l1_distance_matrix(vectors: Sequence[CharacteristicVector]) -> np.ndarray:
    n = len(vectors)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = l1_distance(vectors[i], vectors[j])
    return out


def exact_gram(vectors: Sequence[CharacteristicVector], beta: float = 1.0) -> GramMatrix:
    beta = _check_beta(beta)
    return GramMatrix(np.exp(-l1_distance_matrix(vectors) / beta), beta, "exact")


def approx_gram(features: np.ndarray, beta: float, source: str = "sfm") -> GramMatrix:
    z = np.asarray(features, dtype=np.float64)
    return GramMatrix(z @ z.T, float(beta), source)


def average_error(exact: GramMatrix, features: np.ndarray) -> float:
    """Mean of ``|k(i, j) - z_i . z_j|`` over the upper triangle, diagonal included."""
    z = np.asarray(features, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] != exact.n:
        raise ContractError(f"expected {exact.n} feature rows, got shape {z.shape}")
    iu = np.triu_indices(exact.n)
    approx = z @ z.T
    return float(np.abs(exact.matrix[iu] - approx[iu]).mean())


# -- edit distance with moves, by exhaustive search -------------------------


def _neighbours(s: str, alphabet: str, max_len: int):
    n = len(s)
    if n < max_len:
        for i in range(n + 1):
            for c in alphabet:
                yield s[:i] + c + s[i:]
    for i in range(n):
        yield s[:i] + s[i + 1 :]
        for c in alphabet:
            if c != s[i]:
                yield s[:i] + c + s[i + 1 :]
    for i in range(n):
        for j in range(i + 1, n + 1):
            piece, rest = s[i:j], s[:i] + s[j:]
            for p in range(len(rest) + 1):
                if p != i:
                    yield rest[:p] + piece + rest[p:]


@lru_cache(maxsize=4096)
def _bfs_from(source: str, alphabet: str, bound: int) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        s = queue.popleft()
        ds = dist[s]
        for t in _neighbours(s, alphabet, bound):
            if t not in dist:
                dist[t] = ds + 1
                queue.append(t)
    return dist


def edm_exact(
    s1: str,
    s2: str,
    alphabet: str | None = None,
    max_len: int = ORACLE_MAX_LEN,
    max_depth: int | None = None,
) -> int:
    """Edit distance with moves by breadth-first search over short strings.

    One operation is a single-character insertion, deletion or replacement,
    or moving a substring to another position. Intermediate strings are
    restricted to length ``max(len) + 1`` over ``alphabet`` (default: the
    characters of ``s1`` and ``s2``).
    """
    if len(s1) > max_len or len(s2) > max_len:
        raise ContractError(f"oracle refuses strings longer than {max_len}")
    chars = "".join(sorted(set(s1) | set(s2) if alphabet is None else set(alphabet)))
    if not set(s1) | set(s2) <= set(chars):
        raise ContractError("strings use characters outside the search alphabet")
    if len(chars) > ORACLE_MAX_ALPHABET:
        raise ContractError(f"oracle refuses alphabets larger than {ORACLE_MAX_ALPHABET}")
    if s1 == s2:
        return 0
    bound = max(len(s1), len(s2)) + 1
    dist = _bfs_from(s1, chars, bound).get(s2)
    if dist is None:
        raise RuntimeError("target unreachable; search space is too small")
    if max_depth is not None and dist > max_depth:
        raise ContractError(f"distance exceeds max_depth={max_depth}")
    return dist


# -- concentration of the random feature estimate ---------------------------


@dataclass(frozen=True)
class TailRow:
    D: int
    eps: float
    tail: float
    bound: float
    sigma: float
    trials: int

    @property
    def ok(self) -> bool:
        return self.tail <= self.bound + 3 * self.sigma


def concentration_report(
    x: CharacteristicVector,
    y: CharacteristicVector,
    beta: float,
    D_list: Sequence[int],
    trials: int,
    eps_list: Sequence[float] = (0.05, 0.1, 0.2),
    estimate: Callable[[int, int], np.ndarray] | None = None,
    seed: int = 0,
) -> list[TailRow]:
    """Empirical ``Pr[|z(x).z(y) - k(x, y)| >= eps]`` against the bound ``2 / (eps^2 D)``.

    ``estimate(D, trials)`` returns one inner product per independent seed
    draw; by default fresh hash seeds are drawn for every trial.
    """
    if trials < 1000:
        raise ContractError("concentration_report needs at least 1000 trials")
    beta = _check_beta(beta)
    k = math.exp(-l1_distance(x, y) / beta)
    if estimate is None:
        from .sfm import sfm_inner_products

        rng = np.random.default_rng(seed)

        def estimate(D, n):
            return sfm_inner_products(x, y, D, beta, n, rng)

    rows = []
    for D in D_list:
        err = np.abs(np.asarray(estimate(D, trials)) - k)
        for eps in eps_list:
            bound = 2.0 / (eps * eps * D)
            p = min(bound, 1.0)
            rows.append(
                TailRow(D, eps, float(np.mean(err >= eps)), bound, math.sqrt(p * (1 - p) / trials), trials)
            )
    return rows
