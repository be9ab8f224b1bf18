"""Labeled string corpora: TSV/FASTA ingestion and synthetic generators."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputFormatError


@dataclass(frozen=True)
class CorpusRecord:
    id: int
    label: int
    payload: str


@dataclass(frozen=True)
class LabeledDataset:
    records: tuple[CorpusRecord, ...]

    @classmethod
    def from_pairs(cls, labels: Sequence[int], strings: Sequence[str]) -> LabeledDataset:
        return cls(tuple(CorpusRecord(i, int(y), s) for i, (y, s) in enumerate(zip(labels, strings))))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[CorpusRecord]:
        return iter(self.records)

    @property
    def strings(self) -> list[str]:
        return [r.payload for r in self.records]

    @property
    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.int64)

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted(set().union(*(set(r.payload) for r in self.records))))

    def summary(self) -> dict:
        """Size, positives, alphabet size and mean length."""
        n = len(self.records)
        return {
            "number": n,
            "positives": int(self.labels.sum()) if n else 0,
            "alphabet_size": len(self.alphabet),
            "average_length": float(np.mean([len(r.payload) for r in self.records])) if n else 0.0,
        }


def _parse_label(text: str, path, lineno: int) -> int:
    if text not in ("0", "1"):
        raise InputFormatError(f"label must be 0 or 1, got {text!r}", path, lineno)
    return int(text)


def read_tsv(path) -> LabeledDataset:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise InputFormatError("expected 'label<TAB>string'", path, lineno)
            label = _parse_label(parts[0], path, lineno)
            if not parts[1]:
                raise InputFormatError("empty string payload", path, lineno)
            records.append(CorpusRecord(len(records), label, parts[1]))
    return LabeledDataset(tuple(records))


def read_fasta(path) -> LabeledDataset:
    """FASTA with headers ``>id label=0|1``; sequence lines are concatenated."""
    records = []
    label = None
    header_line = 0
    chunks: list[str] = []

    def flush():
        if label is None:
            return
        payload = "".join(chunks)
        if not payload:
            raise InputFormatError("empty sequence", path, header_line)
        records.append(CorpusRecord(len(records), label, payload))

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                flush()
                tags = [t for t in line[1:].split() if t.startswith("label=")]
                if len(tags) != 1:
                    raise InputFormatError("header needs exactly one 'label=0|1' field", path, lineno)
                label = _parse_label(tags[0][len("label=") :], path, lineno)
                header_line = lineno
                chunks = []
            else:
                if label is None:
                    raise InputFormatError("sequence data before the first header", path, lineno)
                chunks.append(line)
    flush()
    return LabeledDataset(tuple(records))


def ingest(path, format: str = "tsv") -> LabeledDataset:
    path = Path(path)
    if format == "tsv":
        return read_tsv(path)
    if format == "fasta":
        return read_fasta(path)
    raise ValueError(f"unknown corpus format {format!r}")


def write_tsv(path, dataset: LabeledDataset) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in dataset:
            fh.write(f"{r.label}\t{r.payload}\n")


def random_strings(n: int, min_len: int, max_len: int, alphabet: str, rng: np.random.Generator) -> list[str]:
    chars = np.array(list(alphabet))
    return ["".join(chars[rng.integers(0, len(chars), rng.integers(min_len, max_len + 1))]) for _ in range(n)]


def planted_motif_corpus(
    n: int,
    rng: np.random.Generator,
    length: int = 40,
    motif_len: int = 10,
    alphabet: str = "ACGT",
    positive_fraction: float = 0.5,
) -> tuple[LabeledDataset, str]:
    """Random strings; positives carry one fixed motif at a random offset.

    Returns the dataset and the motif.
    """
    chars = np.array(list(alphabet))
    motif = "".join(chars[rng.integers(0, len(chars), motif_len)])
    labels = (rng.random(n) < positive_fraction).astype(int)
    strings = []
    for y in labels:
        s = "".join(chars[rng.integers(0, len(chars), length)])
        if y:
            at = int(rng.integers(0, length - motif_len + 1))
            s = s[:at] + motif + s[at + motif_len :]
        strings.append(s)
    return LabeledDataset.from_pairs(labels, strings), motif
