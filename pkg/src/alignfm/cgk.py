"""CGK random-walk embedding of strings into fixed-length Hamming space."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .vectors import CharacteristicVector

PAD = None  # the padding symbol in embedded strings

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 arrays wrap on overflow
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


@dataclass(frozen=True)
class CgkRandomness:
    """Random advance bits ``R[j][c]``, keyed by seed, output step and symbol code.

    The bit for ``(j, c)`` is a pure function of ``(seed, j, c)``, so tables
    of different lengths agree on their common prefix.
    """

    seed: int
    alphabet: tuple[str, ...]
    _codes: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.alphabet:
            raise ValueError("alphabet must be nonempty")
        codes = {c: i for i, c in enumerate(self.alphabet)}
        if len(codes) != len(self.alphabet):
            raise ValueError("alphabet contains duplicate symbols")
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)
        object.__setattr__(self, "_codes", codes)

    @property
    def n_codes(self) -> int:
        """Symbol codes including the pad code ``len(alphabet)``."""
        return len(self.alphabet) + 1

    def code(self, symbol) -> int:
        if symbol is PAD:
            return len(self.alphabet)
        try:
            return self._codes[symbol]
        except KeyError:
            raise ContractError(f"symbol {symbol!r} is not in the alphabet") from None

    def table(self, length: int) -> np.ndarray:
        """Boolean array of shape ``(length, n_codes)``; row ``j`` is output step ``j + 1``."""
        j = np.arange(1, length + 1, dtype=np.uint64)[:, None]
        c = np.arange(self.n_codes, dtype=np.uint64)[None, :]
        with np.errstate(over="ignore"):
            key = _mix64(np.uint64(self.seed) ^ _GOLDEN) + j * np.uint64(self.n_codes) + c
            return (_mix64(key) >> np.uint64(63)).astype(bool)


def cgk_embed(s: Sequence[str], rnd: CgkRandomness, L_out: int, table: np.ndarray | None = None) -> tuple:
    """Walk over ``s`` emitting one symbol per output step; pad once the input is exhausted."""
    if L_out < 1:
        raise ContractError("embedding length must be positive")
    if len(s) > L_out:
        raise ContractError(f"input of length {len(s)} is longer than the embedding length {L_out}")
    if table is None:
        table = rnd.table(L_out)
    codes = [rnd.code(ch) for ch in s]
    n = len(codes)
    pad = rnd.n_codes - 1
    out = []
    i = 0
    for j in range(L_out):
        if i < n:
            c = codes[i]
            out.append(s[i])
        else:
            c = pad
            out.append(PAD)
        i += int(table[j, c])
    return tuple(out)


def cgk_characteristic_vector(embedded: Sequence, rnd: CgkRandomness) -> CharacteristicVector:
    """0.5 at ``j * (|alphabet| + 1) + code(s'[j])`` for each position ``j``."""
    width = rnd.n_codes
    idx = np.fromiter((j * width + rnd.code(c) for j, c in enumerate(embedded)), np.int64, len(embedded))
    return CharacteristicVector(idx, np.full(idx.size, 0.5), len(embedded) * width)


def hamming(a: Sequence, b: Sequence) -> int:
    if len(a) != len(b):
        raise ContractError("Hamming distance needs equal lengths")
    return sum(x != y for x, y in zip(a, b))


def default_length(strings: Iterable[Sequence[str]]) -> int:
    return 3 * max((len(s) for s in strings), default=1)


def cgk_embed_corpus(
    strings: Sequence[Sequence[str]], rnd: CgkRandomness, L_out: int | None = None, threads: int = 1
) -> list[CharacteristicVector]:
    if L_out is None:
        L_out = default_length(strings)
    table = rnd.table(L_out)

    def one(s):
        return cgk_characteristic_vector(cgk_embed(s, rnd, L_out, table), rnd)

    if threads <= 1:
        return [one(s) for s in strings]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(one, strings))
