"""Edit sensitive parsing (ESP).

An ESP tree is built bottom-up: every level is cut into spans, spans are cut
into blocks of two or three labels, and every block becomes a parent node.
Parent labels are hash-consed through a :class:`LabelDictionary` shared by the
whole corpus, so equal substrings parsed in equal contexts receive equal
labels and the label-count vectors of two strings are close in L1 whenever
the strings are close under edit distance with moves.
"""

from __future__ import annotations

import struct
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import ContractError, InputFormatError
from .vectors import CharacteristicVector

DISTINCT = "i"  # no two adjacent labels equal, length >= 5
REPEAT = "ii"  # one label repeated, length >= 5
OTHER = "iii"

MIN_SPAN = 5
MAX_REDUCTION_ROUNDS = 64

_MAGIC = b"ESPD"
_VERSION = 1


class LabelDictionary:
    """Bijection between node signatures and dense integer labels.

    Leaf symbols take ids ``0 .. len(alphabet) - 1``; internal nodes are keyed
    by the tuple of their children's labels (arity 2 or 3) and numbered in
    first-seen order after the leaves.
    """

    def __init__(self, alphabet: Iterable[str]):
        self.alphabet: tuple[str, ...] = tuple(alphabet)
        if not self.alphabet:
            raise ValueError("alphabet must be nonempty")
        self._leaf_ids = {c: i for i, c in enumerate(self.alphabet)}
        if len(self._leaf_ids) != len(self.alphabet):
            raise ValueError("alphabet contains duplicate symbols")
        self._ids: dict[tuple[int, ...], int] = {}
        self._signatures: list[tuple[int, ...]] = []
        self.frozen = False

    @property
    def n_leaves(self) -> int:
        return len(self.alphabet)

    def __len__(self) -> int:
        return len(self.alphabet) + len(self._signatures)

    def leaf_id(self, symbol: str) -> int:
        try:
            return self._leaf_ids[symbol]
        except KeyError:
            raise ContractError(f"symbol {symbol!r} is not in the leaf alphabet") from None

    def node(self, children: tuple[int, ...]) -> int:
        label = self._ids.get(children)
        if label is not None:
            return label
        if len(children) not in (2, 3):
            raise ContractError(f"internal nodes have 2 or 3 children, got {len(children)}")
        if self.frozen:
            raise ContractError(f"dictionary is frozen; unseen signature {children}")
        label = len(self)
        self._ids[children] = label
        self._signatures.append(children)
        return label

    def lookup(self, children: tuple[int, ...]) -> int | None:
        return self._ids.get(children)

    def children(self, label: int) -> tuple[int, ...]:
        """Child labels of ``label``; empty for leaves."""
        if label < 0 or label >= len(self):
            raise KeyError(label)
        if label < self.n_leaves:
            return ()
        return self._signatures[label - self.n_leaves]

    def expand(self, label: int) -> str:
        """The string derived by ``label``."""
        out = []
        stack = [label]
        while stack:
            lab = stack.pop()
            if lab < self.n_leaves:
                out.append(self.alphabet[lab])
            else:
                stack.extend(reversed(self._signatures[lab - self.n_leaves]))
        return "".join(out)

    def freeze(self) -> None:
        self.frozen = True

    def save(self, path) -> None:
        parts = [_MAGIC, struct.pack("<I", _VERSION), struct.pack("<I", len(self.alphabet))]
        for sym in self.alphabet:
            raw = sym.encode("utf-8")
            parts.append(struct.pack("<I", len(raw)) + raw)
        parts.append(struct.pack("<Q", len(self._signatures)))
        for sig in self._signatures:
            parts.append(struct.pack(f"<B{len(sig)}Q", len(sig), *sig))
        Path(path).write_bytes(b"".join(parts))

    @classmethod
    def load(cls, path) -> LabelDictionary:
        data = Path(path).read_bytes()
        if data[:4] != _MAGIC:
            raise InputFormatError("not an ESP dictionary file (bad magic)", path)
        (version,) = struct.unpack_from("<I", data, 4)
        if version != _VERSION:
            raise InputFormatError(f"unsupported dictionary version {version}", path)
        (n_sym,) = struct.unpack_from("<I", data, 8)
        off = 12
        alphabet = []
        for _ in range(n_sym):
            (n,) = struct.unpack_from("<I", data, off)
            alphabet.append(data[off + 4 : off + 4 + n].decode("utf-8"))
            off += 4 + n
        d = cls(alphabet)
        (n_nodes,) = struct.unpack_from("<Q", data, off)
        off += 8
        for k in range(n_nodes):
            arity = data[off]
            sig = struct.unpack_from(f"<{arity}Q", data, off + 1)
            off += 1 + 8 * arity
            if d.node(tuple(sig)) != d.n_leaves + k:
                raise InputFormatError("duplicate signature in dictionary file", path)
        if off != len(data):
            raise InputFormatError("trailing bytes in dictionary file", path)
        return d


@dataclass(frozen=True)
class EspTree:
    """Per-level label sequences; ``levels[0]`` is the input as leaf ids."""

    levels: tuple[tuple[int, ...], ...]

    @property
    def root(self) -> int:
        return self.levels[-1][0]

    @property
    def height(self) -> int:
        return len(self.levels) - 1

    @property
    def n_nodes(self) -> int:
        return sum(len(level) for level in self.levels)

    def check(self, dictionary: LabelDictionary) -> None:
        """Raise ``AssertionError`` unless every level is a valid 2/3-ary parse of the one below."""
        assert len(self.levels[-1]) == 1, "top level must be a single root"
        for lower, upper in zip(self.levels, self.levels[1:]):
            expanded = []
            for lab in upper:
                kids = dictionary.children(lab)
                assert len(kids) in (2, 3), f"node {lab} has arity {len(kids)}"
                expanded.extend(kids)
            assert tuple(expanded) == lower, "children do not reproduce the level below"


def categorize(seq: Sequence[int]) -> list[tuple[str, int, int]]:
    """Partition ``seq`` into ``(category, start, stop)`` spans, ``stop`` exclusive.

    Spans are found by a greedy left-to-right scan taking the longest
    qualifying span at each position. Category ``"iii"`` leftovers of length 1
    are merged into a neighbour so that every span can be cut into blocks of
    two or three.
    """
    n = len(seq)
    if n == 0:
        raise ContractError("cannot categorize an empty sequence")

    def run_stop(pos):
        end = pos + 1
        while end < n and seq[end] == seq[pos]:
            end += 1
        return end

    spans: list[list] = []

    def push(cat, start, stop):
        if cat == OTHER and spans and spans[-1][0] == OTHER:
            spans[-1][2] = stop
        else:
            spans.append([cat, start, stop])

    pos = 0
    while pos < n:
        stop = run_stop(pos)
        if stop - pos >= MIN_SPAN:
            push(REPEAT, pos, stop)
            pos = stop
            continue
        end = pos + 1
        while end < n and seq[end] != seq[end - 1]:
            end += 1
        # leave a long run that starts at the stretch's last label to category (ii)
        if end < n and run_stop(end - 1) - (end - 1) >= MIN_SPAN:
            end -= 1
        push(DISTINCT if end - pos >= MIN_SPAN else OTHER, pos, end)
        pos = end

    k = 0
    while k < len(spans):
        cat, start, stop = spans[k]
        if cat != OTHER or stop - start != 1 or len(spans) == 1:
            k += 1
            continue
        prev = spans[k - 1] if k > 0 else None
        nxt = spans[k + 1] if k + 1 < len(spans) else None
        if prev is not None and prev[0] != DISTINCT:
            prev[0], prev[2] = OTHER, stop
            del spans[k]
        elif nxt is not None and nxt[0] != DISTINCT:
            nxt[0], nxt[1] = OTHER, start
            del spans[k]
        elif prev is not None:
            prev[2] -= 1
            spans[k][1] -= 1
            if prev[2] - prev[1] < MIN_SPAN:
                spans[k][1] = prev[1]
                del spans[k - 1]
                k -= 1
            k += 1
        else:
            nxt[1] += 1
            spans[k][2] += 1
            if nxt[2] - nxt[1] < MIN_SPAN:
                spans[k][2] = nxt[2]
                del spans[k + 1]
            k += 1
    return [(cat, start, stop) for cat, start, stop in spans]


def lpp_parse(seq: Sequence[int], dictionary: LabelDictionary) -> list[int]:
    """Left preferential parsing: pairs from the left, a final triple if the length is odd."""
    n = len(seq)
    if n < 2:
        raise ContractError("left preferential parsing needs at least two labels")
    stop = n if n % 2 == 0 else n - 3
    out = [dictionary.node((seq[i], seq[i + 1])) for i in range(0, stop, 2)]
    if n % 2:
        out.append(dictionary.node((seq[n - 3], seq[n - 2], seq[n - 1])))
    return out


def _lsb_label(a: int, b: int) -> int:
    """``2p + bit(p, b)`` where ``p`` is the lowest bit in which ``a`` and ``b`` differ."""
    x = a ^ b
    p = (x & -x).bit_length() - 1
    return 2 * p + ((b >> p) & 1)


def alphabet_reduction(seq: Sequence[int]) -> list[int]:
    """Relabel a repetition-free sequence onto ``{0, 1, 2}`` keeping neighbours distinct.

    The first position has no left neighbour; it is labelled against its
    right neighbour, which keeps it distinct from position 2.
    """
    n = len(seq)
    if n < 2:
        raise ContractError("alphabet reduction needs at least two labels")
    labels = list(seq)
    for i in range(1, n):
        if labels[i] == labels[i - 1]:
            raise ContractError(f"adjacent equal labels at positions {i - 1} and {i}")
    if min(labels) < 0:
        raise ContractError("labels must be nonnegative")

    for _ in range(MAX_REDUCTION_ROUNDS):
        if max(labels) <= 5:
            break
        nxt = [_lsb_label(labels[1], labels[0])]
        nxt.extend(_lsb_label(labels[i - 1], labels[i]) for i in range(1, n))
        labels = nxt
    else:
        raise RuntimeError("alphabet reduction did not converge")

    for high in (3, 4, 5):
        for i in range(n):
            if labels[i] == high:
                left = labels[i - 1] if i > 0 else -1
                right = labels[i + 1] if i + 1 < n else -1
                labels[i] = next(v for v in (0, 1, 2) if v != left and v != right)
    return labels


def select_landmarks(reduced: Sequence[int]) -> list[int]:
    """Interior local maxima, then interior local minima not adjacent to a landmark (0-based)."""
    a = reduced
    n = len(a)
    chosen = [i for i in range(1, n - 1) if a[i - 1] < a[i] > a[i + 1]]
    taken = set(chosen)
    for i in range(1, n - 1):
        if a[i - 1] > a[i] < a[i + 1] and i - 1 not in taken and i + 1 not in taken:
            taken.add(i)
    return sorted(taken)


def _split_pieces(start: int, stop: int) -> list[tuple[int, int]]:
    length = stop - start
    if length <= 3:
        return [(start, stop)]
    cut = stop if length % 2 == 0 else stop - 3
    pieces = [(i, i + 2) for i in range(start, cut, 2)]
    if length % 2:
        pieces.append((cut, stop))
    return pieces


def landmark_blocks(n: int, landmarks: Sequence[int]) -> list[tuple[int, int]]:
    """Cut ``range(n)`` into blocks of length 2 or 3, each starting at a landmark.

    A leading or trailing leftover of a single label joins its neighbour; a
    block of four is split 2 + 2.
    """
    if not landmarks:
        return _split_pieces(0, n)
    bounds = [0, *landmarks, n]
    blocks = [[bounds[k], bounds[k + 1]] for k in range(len(bounds) - 1) if bounds[k + 1] > bounds[k]]
    if len(blocks) > 1 and blocks[0][1] - blocks[0][0] == 1:
        blocks[1][0] = blocks[0][0]
        del blocks[0]
    if len(blocks) > 1 and blocks[-1][1] - blocks[-1][0] == 1:
        blocks[-2][1] = blocks[-1][1]
        del blocks[-1]
    out = []
    for start, stop in blocks:
        out.extend(_split_pieces(start, stop))
    return out


def _parse_distinct(seq: Sequence[int], dictionary: LabelDictionary) -> list[int]:
    reduced = alphabet_reduction(seq)
    blocks = landmark_blocks(len(seq), select_landmarks(reduced))
    return [dictionary.node(tuple(seq[a:b])) for a, b in blocks]


def esp_parse_level(seq: Sequence[int], dictionary: LabelDictionary) -> list[int]:
    """Parse one level into the next: LPP on (ii)/(iii) spans, landmarks on (i) spans."""
    if len(seq) < 2:
        raise ContractError("a level needs at least two labels to be parsed")
    out: list[int] = []
    for cat, start, stop in categorize(seq):
        span = seq[start:stop]
        if cat == DISTINCT:
            out.extend(_parse_distinct(span, dictionary))
        else:
            out.extend(lpp_parse(span, dictionary))
    return out


def build_esp_tree(s: Sequence[str], dictionary: LabelDictionary) -> EspTree:
    if len(s) == 0:
        raise ContractError("cannot build an ESP tree for an empty string")
    level = [dictionary.leaf_id(c) for c in s]
    levels = [tuple(level)]
    while len(level) > 1:
        level = esp_parse_level(level, dictionary)
        levels.append(tuple(level))
    return EspTree(tuple(levels))


def characteristic_vector(tree: EspTree, dim: int | None = None) -> CharacteristicVector:
    """Count of every label in the tree, leaves and root included."""
    counts = Counter()
    for level in tree.levels:
        counts.update(level)
    return CharacteristicVector.from_mapping(counts, dim)


def esp_embed(strings: Iterable[Sequence[str]], dictionary: LabelDictionary) -> list[CharacteristicVector]:
    """Parse a corpus in order against one dictionary; vectors share the final dimension."""
    trees = [build_esp_tree(s, dictionary) for s in strings]
    d = len(dictionary)
    return [characteristic_vector(t, d) for t in trees]
