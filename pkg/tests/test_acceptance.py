"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary block at
the end of the session lists every criterion.
"""

from __future__ import annotations

import contextlib
import io
import json
import math
import time

import numpy as np
import pytest

from alignfm import cli, pipeline
from alignfm.cgk import CgkRandomness, cgk_characteristic_vector, cgk_embed, hamming
from alignfm.classify import cross_validate
from alignfm.corpus import planted_motif_corpus, random_strings
from alignfm.esp import LabelDictionary, build_esp_tree, characteristic_vector, esp_embed
from alignfm.formats import write_sparse
from alignfm.kernels import concentration_report, edm_exact, l1_distance
from alignfm.seeding import derive_seed, rng_for
from alignfm.sfm import HashSeeds, sfm_transform
from alignfm.vectors import CharacteristicVector

DNA = "ACGT"


# -- 1. average error ---------------------------------------------------------

TARGETS = {128: 7.05e-2, 512: 3.53e-2, 2048: 1.76e-2}
CGK_TARGETS = {128: 7.056e-2, 512: 3.524e-2, 2048: 1.761e-2}


@pytest.fixture(scope="module")
def error_corpus():
    return random_strings(200, 100, 500, DNA, rng_for(2024, "error-corpus"))


@pytest.mark.parametrize(
    "embedding,mode",
    [("esp", "sfm"), ("esp", "fm"), ("cgk", "sfm"), ("cgk", "fm")],
)
def test_c1_average_error(error_corpus, embedding, mode, report):
    emb = pipeline.embed_strings(error_corpus, embedding, alphabet=DNA, cgk_seed=7)
    targets = CGK_TARGETS if embedding == "cgk" else TARGETS
    t0 = time.perf_counter()
    rows = pipeline.error_table(emb.vectors, list(targets), beta=1.0, modes=(mode,), repeats=5, seed=11)
    elapsed = time.perf_counter() - t0
    got = {r["D"]: r["mean_error"] for r in rows}
    ok = all(abs(got[D] - t) <= 0.25 * t for D, t in targets.items()) and elapsed <= 300
    detail = ", ".join(f"D={D} {got[D]:.4g} (target {t:.4g})" for D, t in targets.items())
    assert report(f"C1 average error {mode}/{embedding}", ok, f"{detail}; {elapsed:.1f}s"), detail


# -- 2. tail bound ------------------------------------------------------------


def _mutate(s: str, edits: int, rng) -> str:
    s = list(s)
    for _ in range(edits):
        k = int(rng.integers(0, len(s)))
        s[k] = DNA[(DNA.index(s[k]) + 1 + int(rng.integers(0, 3))) % 4]
    return "".join(s)


def test_c2_tail_bound(report):
    rng = rng_for(5, "pairs")
    base = random_strings(3, 150, 300, DNA, rng)
    strings = [base[0], _mutate(base[0], 1, rng), base[1], _mutate(base[1], 8, rng), base[2], base[0]]
    vectors = esp_embed(strings, LabelDictionary(DNA))
    pairs = [(vectors[0], vectors[1]), (vectors[2], vectors[3]), (vectors[4], vectors[5])]
    t0 = time.perf_counter()
    failures, worst = [], 0.0
    for k, (x, y) in enumerate(pairs):
        for row in concentration_report(x, y, 1.0, (128, 512), 10_000, seed=derive_seed(5, f"pair/{k}")):
            worst = max(worst, row.tail / min(row.bound, 1.0))
            if not row.ok:
                failures.append((k, row.D, row.eps, row.tail, row.bound))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed <= 600
    detail = f"18 rows, {len(failures)} over bound, max tail/bound {worst:.3f}; {elapsed:.1f}s"
    assert report("C2 tail bound 2/(eps^2 D)", ok, detail), failures


# -- 3. memory ----------------------------------------------------------------


def _cli_json(argv) -> dict:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        assert cli.main(argv) == 0
    return json.loads(buf.getvalue().strip().splitlines()[-1])


def test_c3_memory(tmp_path, report):
    rng = rng_for(3, "memory")
    d = 10_000
    vectors = [
        CharacteristicVector(np.sort(rng.choice(d, 200, replace=False)), rng.integers(1, 6, 200), d)
        for _ in range(50)
    ]
    feats = tmp_path / "f.txt"
    write_sparse(feats, [0] * len(vectors), vectors)
    aux = {}
    for mode in ("sfm", "fm"):
        for D in (128, 16384):
            out = tmp_path / f"z_{mode}_{D}.txt"
            argv = ["project", "--input", str(feats), "--input-dim", str(d), "--dim", str(D)]
            argv += ["--mode", mode, "--seed", "1", "--output", str(out)]
            aux[mode, D] = _cli_json(argv)["aux_bytes"]
    sfm_ratio = aux["sfm", 16384] / aux["sfm", 128]
    fm_ratio = aux["fm", 16384] / aux["fm", 128]
    ok = abs(sfm_ratio - 1.0) < 0.10 and fm_ratio >= 64
    detail = (
        f"sfm {aux['sfm', 128]} -> {aux['sfm', 16384]} B (x{sfm_ratio:.3f}); "
        f"fm {aux['fm', 128]} -> {aux['fm', 16384]} B (x{fm_ratio:.1f})"
    )
    assert report("C3 memory vs D", ok, detail), detail


# -- 4. EDM lower bound and oracle sanity --------------------------------------


def _binary(rng, lo, hi):
    return "".join(rng.choice(["a", "b"], int(rng.integers(lo, hi + 1))))


def test_c4_edm_lower_bound(report):
    rng = rng_for(4, "edm")
    t0 = time.perf_counter()
    dictionary = LabelDictionary("ab")
    violations = 0
    for _ in range(500):
        s1, s2 = _binary(rng, 1, 6), _binary(rng, 1, 6)
        v1 = characteristic_vector(build_esp_tree(s1, dictionary))
        v2 = characteristic_vector(build_esp_tree(s2, dictionary))
        violations += edm_exact(s1, s2, alphabet="ab") > l1_distance(v1, v2)
    bad_sym = bad_tri = 0
    for _ in range(200):
        a, b, c = (_binary(rng, 1, 5) for _ in range(3))
        ab, ba = edm_exact(a, b, alphabet="ab"), edm_exact(b, a, alphabet="ab")
        bc, ac = edm_exact(b, c, alphabet="ab"), edm_exact(a, c, alphabet="ab")
        bad_sym += ab != ba
        bad_tri += ac > ab + bc
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and bad_sym == 0 and bad_tri == 0 and elapsed <= 300
    detail = f"{violations} bound violations / 500, {bad_sym} asymmetric, {bad_tri} triangle failures; {elapsed:.1f}s"
    assert report("C4 EDM <= L1 and oracle metric checks", ok, detail), detail


# -- 5. CGK Hamming identity --------------------------------------------------


def test_c5_cgk_identity(report):
    rng = rng_for(6, "cgk")
    rnd = CgkRandomness(99, tuple(DNA))
    L_out = 3 * 64
    table = rnd.table(L_out)
    mismatches = 0
    for _ in range(10_000):
        s, t = random_strings(2, 1, 64, DNA, rng)
        a, b = cgk_embed(s, rnd, L_out, table), cgk_embed(t, rnd, L_out, table)
        l1 = l1_distance(cgk_characteristic_vector(a, rnd), cgk_characteristic_vector(b, rnd))
        mismatches += int(round(2 * l1)) != 2 * hamming(a, b) or 2 * l1 != int(2 * l1)
    assert report("C5 CGK Hamming = L1", mismatches == 0, f"{mismatches} mismatches / 10000"), mismatches


# -- 6. ESP structure ---------------------------------------------------------


def test_c6_esp_structure(report):
    rng = rng_for(8, "esp-structure")
    dictionary = LabelDictionary(DNA)
    strings = []
    for k in range(1000):
        n = int(rng.integers(1, 4097))
        if k % 4 == 3:
            # long runs and short periods exercise the repeat and "other" spans
            pool = ["A" * int(rng.integers(1, 30)), "AC", "G", "TTTT", "ACG"]
            s = "".join(pool[int(rng.integers(0, len(pool)))] for _ in range(n))[:n]
        else:
            s = random_strings(1, n, n, DNA if k % 2 else "AC", rng)[0]
        strings.append(s)
    t0 = time.perf_counter()
    height_bad = arity_bad = 0
    trees = []
    for s in strings:
        tree = build_esp_tree(s, dictionary)
        trees.append(tree)
        height_bad += tree.height > math.ceil(math.log2(len(s))) + 2
        try:
            tree.check(dictionary)
        except AssertionError:
            arity_bad += 1
    size = len(dictionary)
    dictionary.freeze()
    same = sum(build_esp_tree(s, dictionary) == t for s, t in zip(strings, trees))
    new_labels = len(dictionary) - size
    elapsed = time.perf_counter() - t0
    ok = height_bad == 0 and arity_bad == 0 and new_labels == 0 and same == len(strings)
    detail = (
        f"{height_bad} height, {arity_bad} arity violations, {new_labels} new labels on re-parse, "
        f"{same}/1000 identical trees; {elapsed:.1f}s"
    )
    assert report("C6 ESP structural invariants", ok, detail), detail


# -- 7. unit norm -------------------------------------------------------------


def test_c7_unit_norm(report):
    rng = rng_for(9, "norm")
    d = 5000
    vectors = []
    for _ in range(1000):
        nnz = int(rng.integers(1, 300))
        idx = np.sort(rng.choice(d, nnz, replace=False))
        vectors.append(CharacteristicVector(idx, rng.integers(1, 50, nnz), d))
    worst = 0.0
    for D in (2, 128):
        seeds = HashSeeds.generate(d, float(rng.choice([1.0, 10.0, 1000.0])), rng)
        z = sfm_transform(vectors, D, seeds)
        norms = np.linalg.norm(z, axis=1)
        selfk = np.einsum("ij,ij->i", z, z)
        worst = max(worst, float(np.abs(norms - 1).max()), float(np.abs(selfk - 1).max()))
    ok = worst <= 1e-9
    assert report("C7 unit norm / self-kernel", ok, f"max deviation {worst:.2e} over 2000 vectors"), worst


# -- 8. end-to-end classification ----------------------------------------------


def _cv_auc(vectors, labels, D, master):
    d = vectors[0].dim
    seeds = HashSeeds.generate(d, 1.0, rng_for(master, "sfm"))

    def featurize(beta):
        return pipeline.project(vectors, D, beta, "sfm", d=d, state=seeds.with_beta(beta)).features

    return cross_validate(featurize, labels, folds=3, seed=derive_seed(master, "folds") & 0xFFFFFFFF)


def test_c8_end_to_end(report):
    t0 = time.perf_counter()
    auc_small, auc_large = [], []
    for rep in range(5):
        data, _ = planted_motif_corpus(2000, rng_for(rep, "motif-corpus"))
        emb = pipeline.embed_dataset(data, "esp")
        auc_large.append(_cv_auc(emb.vectors, data.labels, 2048, rep).auc)
        auc_small.append(_cv_auc(emb.vectors, data.labels, 128, rep).auc)
    elapsed = time.perf_counter() - t0
    mean_large, mean_small = float(np.mean(auc_large)), float(np.mean(auc_small))
    ok = mean_large >= 0.9 and mean_large >= mean_small
    detail = (
        f"mean AUC D=2048 {mean_large:.4f}, D=128 {mean_small:.4f} "
        f"(per rep 2048: {', '.join(f'{a:.3f}' for a in auc_large)}); {elapsed:.0f}s"
    )
    assert report("C8 planted-motif CV AUC", ok, detail), detail
