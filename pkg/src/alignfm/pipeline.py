"""Corpus-level stages with timing and allocator-level memory accounting."""

from __future__ import annotations

import contextlib
import time
import tracemalloc
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cgk, esp, sfm
from .corpus import LabeledDataset
from .errors import ContractError
from .kernels import average_error, exact_gram
from .seeding import derive_seed, rng_for
from .vectors import CharacteristicVector, common_dim


@dataclass
class StageStats:
    seconds: float = 0.0
    peak_bytes: int = 0


@contextlib.contextmanager
def measure():
    """Wall time and peak traced allocations of the enclosed block.

    Memory allocated before entering (inputs, preallocated outputs) is not
    counted; only the block's own peak above its starting level is.
    """
    stats = StageStats()
    started = not tracemalloc.is_tracing()
    if started:
        tracemalloc.start()
    base, _ = tracemalloc.get_traced_memory()
    tracemalloc.reset_peak()
    t0 = time.perf_counter()
    try:
        yield stats
    finally:
        stats.seconds = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
        stats.peak_bytes = max(0, peak - base)
        if started:
            tracemalloc.stop()


@dataclass
class Embedding:
    method: str
    vectors: list[CharacteristicVector]
    dim: int
    state: object  # LabelDictionary or CgkRandomness
    cgk_len: int | None = None
    stats: StageStats = field(default_factory=StageStats)


def embed_strings(
    strings: Sequence[str],
    method: str = "esp",
    alphabet: Sequence[str] | None = None,
    cgk_len: int | None = None,
    cgk_seed: int = 0,
    dictionary: esp.LabelDictionary | None = None,
    threads: int = 1,
) -> Embedding:
    """Embed a corpus. The ESP dictionary is always built on one thread."""
    if alphabet is None:
        alphabet = sorted(set().union(*map(set, strings)))
    with measure() as stats:
        if method == "esp":
            d = dictionary if dictionary is not None else esp.LabelDictionary(alphabet)
            vectors = esp.esp_embed(strings, d)
            emb = Embedding("esp", vectors, len(d), d)
        elif method == "cgk":
            rnd = cgk.CgkRandomness(cgk_seed, tuple(alphabet))
            L = cgk_len if cgk_len is not None else cgk.default_length(strings)
            vectors = cgk.cgk_embed_corpus(strings, rnd, L, threads=threads)
            emb = Embedding("cgk", vectors, L * rnd.n_codes, rnd, cgk_len=L)
        else:
            raise ContractError(f"unknown embedding method {method!r}")
    emb.stats = stats
    return emb


def embed_dataset(dataset: LabeledDataset, method: str = "esp", **kwargs) -> Embedding:
    return embed_strings(dataset.strings, method, alphabet=dataset.alphabet, **kwargs)


@dataclass
class Projection:
    mode: str
    features: np.ndarray
    state: object  # HashSeeds or DenseProjection
    stats: StageStats

    @property
    def aux_bytes(self) -> int:
        """Peak memory of the stage excluding the output buffer."""
        return self.stats.peak_bytes


def _run_chunks(fn, vectors, out, threads: int):
    n = len(vectors)
    if threads <= 1 or n < 2:
        fn(vectors, out)
        return
    bounds = np.linspace(0, n, min(threads, n) + 1).astype(int)
    with ThreadPoolExecutor(threads) as pool:
        futures = [
            pool.submit(fn, vectors[a:b], out[a:b]) for a, b in zip(bounds, bounds[1:]) if b > a
        ]
        for f in futures:
            f.result()


def project(
    vectors: Sequence[CharacteristicVector],
    D: int,
    beta: float = 1.0,
    mode: str = "sfm",
    seed: int = 0,
    d: int | None = None,
    threads: int = 1,
    state=None,
) -> Projection:
    """Build the map and project every vector.

    Map randomness comes from the ``"sfm"`` / ``"fm"`` streams of ``seed``
    unless ``state`` supplies the map, either directly or as a zero-argument
    loader (called inside the measured region so its memory is counted).
    """
    vectors = list(vectors)
    if d is None:
        d = common_dim(vectors)
    out = np.zeros((len(vectors), sfm._check_D(D)))
    with measure() as stats:
        if callable(state):
            state = state()
        if mode == "sfm":
            seeds = state if state is not None else sfm.HashSeeds.generate(d, beta, rng_for(seed, "sfm"))
            _run_chunks(lambda vs, o: sfm.sfm_transform(vs, D, seeds, out=o), vectors, out, threads)
            state = seeds
        elif mode == "fm":
            proj = state if state is not None else sfm.sample_dense_projection(d, D, beta, rng_for(seed, "fm"))
            if proj.D != D:
                raise ContractError(f"dense projection has D={proj.D}, requested {D}")
            _run_chunks(lambda vs, o: sfm.fm_transform(vs, proj, out=o), vectors, out, threads)
            state = proj
        else:
            raise ContractError(f"unknown projection mode {mode!r}")
    return Projection(mode, out, state, stats)


def error_table(
    vectors: Sequence[CharacteristicVector],
    dims: Sequence[int],
    beta: float = 1.0,
    modes: Sequence[str] = ("sfm", "fm"),
    repeats: int = 5,
    seed: int = 0,
    method: str = "esp",
) -> list[dict]:
    """Average kernel error per (mode, D) over ``repeats`` independent maps."""
    gram = exact_gram(vectors, beta)
    rows = []
    for mode in modes:
        for D in dims:
            errs = []
            for r in range(repeats):
                p = project(vectors, D, beta, mode, seed=derive_seed(seed, f"repeat/{r}"))
                errs.append(average_error(gram, p.features))
                del p
            rows.append(
                {
                    "method": f"{mode}-{method}",
                    "D": int(D),
                    "beta": float(beta),
                    "mean_error": float(np.mean(errs)),
                    "std_error": float(np.std(errs, ddof=1)) if len(errs) > 1 else 0.0,
                }
            )
    return rows

