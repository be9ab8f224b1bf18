"""Command line interface: ``alignfm <subcommand> ...``.

Exit codes: 0 success, 2 input error, 3 contract violation.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import classify, kernels, pipeline
from .cgk import CgkRandomness
from .corpus import LabeledDataset, ingest, planted_motif_corpus, random_strings, write_tsv
from .errors import ContractError, InputFormatError
from .esp import LabelDictionary
from .formats import (
    read_dense,
    read_sparse,
    write_dense,
    write_error_csv,
    write_gram,
    write_sparse,
)
from .seeding import derive_seed, resolve_master, rng_for
from .sfm import HashSeeds

log = logging.getLogger("alignfm")

EXIT_INPUT = 2
EXIT_CONTRACT = 3


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


@contextlib.contextmanager
def _open_out(path):
    """Text handle for ``path``; ``-`` or None means stdout, which is left open."""
    if path and path != "-":
        with open(path, "w", encoding="ascii") as fh:
            yield fh
    else:
        yield sys.stdout


# -- subcommands ------------------------------------------------------------


def cmd_embed(args) -> int:
    master = resolve_master(args.seed)
    data = ingest(args.input, args.format)
    if len(data) == 0:
        raise InputFormatError("corpus is empty", args.input)
    kwargs = {}
    if args.method == "esp":
        if args.state_in:
            kwargs["dictionary"] = LabelDictionary.load(args.state_in)
    else:
        kwargs["cgk_len"] = args.cgk_len
        kwargs["cgk_seed"] = args.cgk_seed if args.cgk_seed is not None else derive_seed(master, "cgk")
    alphabet = data.alphabet
    if args.method == "esp" and "dictionary" in kwargs:
        alphabet = kwargs["dictionary"].alphabet
    emb = pipeline.embed_strings(data.strings, args.method, alphabet=alphabet, threads=args.threads, **kwargs)
    write_sparse(args.output, data.labels, emb.vectors)
    if args.state_out:
        if args.method == "esp":
            emb.state.save(args.state_out)
        else:
            rnd: CgkRandomness = emb.state
            meta = {"seed": rnd.seed, "cgk_len": emb.cgk_len, "alphabet": list(rnd.alphabet)}
            Path(args.state_out).write_text(json.dumps(meta) + "\n")
    _emit(
        {
            "method": emb.method,
            "d": emb.dim,
            "seconds": emb.stats.seconds,
            "peak_bytes": emb.stats.peak_bytes,
            "master_seed": master,
            **data.summary(),
        }
    )
    return 0


def cmd_project(args) -> int:
    master = resolve_master(args.seed)
    labels, vectors = read_sparse(args.input, args.input_dim)
    d = max(v.dim for v in vectors) if vectors else 0
    if args.seeds_in and args.mode != "sfm":
        raise ContractError("--seeds-in only applies to --mode sfm")

    def load_seeds():
        seeds = HashSeeds.load(args.seeds_in)
        return seeds if seeds.beta == args.beta else seeds.with_beta(args.beta)

    state = load_seeds if args.seeds_in else None

    p = pipeline.project(vectors, args.dim, args.beta, args.mode, master, d=d, threads=args.threads, state=state)
    if p.mode == "sfm" and getattr(p.state, "d", d) < d:
        raise ContractError(f"seeds cover d={p.state.d} but features need d={d}")
    write_dense(args.output, labels, p.features, sparse=args.sparse_output)
    if args.seeds_out:
        if args.mode != "sfm":
            raise ContractError("--seeds-out only applies to --mode sfm")
        p.state.save(args.seeds_out)
    _emit(
        {
            "mode": p.mode,
            "D": args.dim,
            "d": d,
            "beta": args.beta,
            "n": len(vectors),
            "seconds": p.stats.seconds,
            "aux_bytes": p.aux_bytes,
            "map_bytes": p.state.nbytes,
            "master_seed": master,
        }
    )
    return 0


def cmd_gram(args) -> int:
    if args.rff:
        _, z = read_dense(args.rff)
        g = kernels.approx_gram(z, args.beta, "rff")
    else:
        _, vectors = read_sparse(args.input)
        g = kernels.exact_gram(vectors, args.beta)
    write_gram(args.output, g.matrix)
    return 0


def cmd_eval_error(args) -> int:
    _, vectors = read_sparse(args.features)
    if args.rff:
        _, z = read_dense(args.rff)
        err = kernels.average_error(kernels.exact_gram(vectors, args.beta), z)
        rows = [{"method": args.label, "D": z.shape[1], "beta": args.beta, "mean_error": err, "std_error": 0.0}]
    else:
        master = resolve_master(args.seed)
        rows = pipeline.error_table(
            vectors, _ints(args.dims), args.beta, args.modes.split(","), args.repeats, master, args.label
        )
    with _open_out(args.output) as fh:
        write_error_csv(fh, rows)
    return 0


def cmd_concentration(args) -> int:
    master = resolve_master(args.seed)
    _, vectors = read_sparse(args.features)
    pairs = [tuple(int(t) for t in p.split(",")) for p in args.pairs.split(";") if p]
    with _open_out(args.output) as out:
        out.write("pair,D,eps,tail,bound,sigma,ok\n")
        for a, b in pairs:
            rows = kernels.concentration_report(
                vectors[a], vectors[b], args.beta, _ints(args.dims), args.trials, _floats(args.eps),
                seed=derive_seed(master, f"concentration/{a},{b}"),
            )
            for r in rows:
                out.write(f"{a}-{b},{r.D},{r.eps},{r.tail!r},{r.bound!r},{r.sigma!r},{int(r.ok)}\n")
    return 0


def cmd_train(args) -> int:
    master = resolve_master(args.seed)
    labels, z = read_dense(args.rff)
    model = classify.train_linear(z, labels, C=args.C, epochs=args.epochs, seed=derive_seed(master, "train"))
    model.save(args.model)
    scores = model.decision_function(z)
    _emit(
        {
            "C": args.C,
            "epochs": args.epochs,
            "train_accuracy": float(np.mean(model.predict(z) == labels)),
            "train_auc": classify.auc(scores, labels),
            "objective": model.objective[-1] if model.objective else None,
            "master_seed": master,
        }
    )
    return 0


def cmd_predict(args) -> int:
    model = classify.LinearModel.load(args.model)
    labels, z = read_dense(args.rff)
    scores = model.decision_function(z)
    with _open_out(args.output) as fh:
        for s in scores.tolist():
            fh.write(f"{s!r}\n")
    report = {"n": int(labels.size), "accuracy": float(np.mean(model.predict(z) == labels))}
    if labels.size and set(np.unique(labels).tolist()) == {0, 1}:
        report["auc"] = classify.auc(scores, labels)
    print(json.dumps(report, sort_keys=True), file=sys.stderr if args.output in (None, "-") else sys.stdout)
    return 0


def cmd_cv(args) -> int:
    master = resolve_master(args.seed)
    labels, vectors = read_sparse(args.features)
    d = max(v.dim for v in vectors)
    seeds = HashSeeds.generate(d, 1.0, rng_for(master, "sfm")) if args.mode == "sfm" else None

    def featurize(beta):
        if seeds is not None:
            return pipeline.project(vectors, args.dim, beta, "sfm", d=d, state=seeds.with_beta(beta)).features
        return pipeline.project(vectors, args.dim, beta, "fm", seed=master, d=d).features

    res = classify.cross_validate(
        featurize, labels, args.folds, _floats(args.betas), _floats(args.Cs), args.epochs,
        seed=derive_seed(master, "folds") & 0xFFFFFFFF,
    )
    _emit(
        {
            "best_beta": res.beta,
            "best_C": res.C,
            "best_auc": res.auc,
            "grid": [{"beta": b, "C": c, "auc": a} for b, c, a in res.table],
            "master_seed": master,
        }
    )
    return 0


def cmd_edm_oracle(args) -> int:
    print(kernels.edm_exact(args.s1, args.s2, max_len=args.max_len))
    return 0


def cmd_synth(args) -> int:
    master = resolve_master(args.seed)
    rng = rng_for(master, "synth")
    if args.kind == "motif":
        data, motif = planted_motif_corpus(args.n, rng, args.max_len, args.motif_len, args.alphabet)
        log.info("planted motif %s", motif)
    else:
        strings = random_strings(args.n, args.min_len, args.max_len, args.alphabet, rng)
        data = LabeledDataset.from_pairs(rng.integers(0, 2, args.n).tolist(), strings)
    write_tsv(args.output, data)
    return 0


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alignfm", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=fn)
        p.add_argument("--seed", type=int, default=None, help="master seed (logged when omitted)")
        return p

    p = add("embed", cmd_embed, "strings -> sparse characteristic vectors")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("tsv", "fasta"), default="tsv")
    p.add_argument("--method", choices=("esp", "cgk"), default="esp")
    p.add_argument("--output", required=True)
    p.add_argument("--state-out", help="write the ESP dictionary / CGK parameters here")
    p.add_argument("--state-in", help="continue an existing ESP dictionary")
    p.add_argument("--cgk-len", type=int, default=None, help="CGK output length (default 3 * max length)")
    p.add_argument("--cgk-seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1, help="worker threads for cgk (esp is sequential)")

    p = add("project", cmd_project, "characteristic vectors -> random Fourier features")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dim", "-D", type=int, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mode", "--method", dest="mode", choices=("sfm", "fm"), default="sfm")
    p.add_argument("--input-dim", type=int, default=None, help="feature space size d (default: max index)")
    p.add_argument("--seeds-out")
    p.add_argument("--seeds-in")
    p.add_argument("--sparse-output", action="store_true", help="write idx:val pairs for linear-SVM tools")
    p.add_argument("--threads", type=int, default=1)

    p = add("gram", cmd_gram, "exact or approximate Gram matrix")
    p.add_argument("--input", help="sparse features (exact Laplacian kernel)")
    p.add_argument("--rff", help="dense RFF file (inner products)")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--output", required=True)

    p = add("eval-error", cmd_eval_error, "average kernel approximation error")
    p.add_argument("--features", required=True)
    p.add_argument("--rff", help="score this RFF file instead of sampling maps")
    p.add_argument("--dims", default="128,512,2048")
    p.add_argument("--modes", default="sfm,fm")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--label", default="esp", help="embedding name for the method column")
    p.add_argument("--output", default="-")

    p = add("concentration", cmd_concentration, "empirical tail vs 2/(eps^2 D)")
    p.add_argument("--features", required=True)
    p.add_argument("--pairs", default="0,1", help="semicolon-separated row pairs, e.g. '0,1;2,3'")
    p.add_argument("--dims", default="128,512")
    p.add_argument("--eps", default="0.05,0.1,0.2")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--output", default="-")

    p = add("train", cmd_train, "fit the linear model on an RFF file")
    p.add_argument("--rff", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=20)

    p = add("cv", cmd_cv, "grid-searched k-fold cross-validation")
    p.add_argument("--features", required=True)
    p.add_argument("--dim", "-D", type=int, default=2048)
    p.add_argument("--mode", "--method", dest="mode", choices=("sfm", "fm"), default="sfm")
    p.add_argument("--betas", default=",".join(map(str, classify.DEFAULT_BETAS)))
    p.add_argument("--Cs", default=",".join(map(str, classify.DEFAULT_CS)))
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--epochs", type=int, default=20)

    p = add("predict", cmd_predict, "score an RFF file with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--rff", required=True)
    p.add_argument("--output", default="-")

    p = add("edm-oracle", cmd_edm_oracle, "exact edit distance with moves for short strings")
    p.add_argument("s1")
    p.add_argument("s2")
    p.add_argument("--max-len", type=int, default=kernels.ORACLE_MAX_LEN)

    p = add("synth", cmd_synth, "write a synthetic labelled corpus")
    p.add_argument("--kind", choices=("random", "motif"), default="random")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--min-len", type=int, default=100)
    p.add_argument("--max-len", type=int, default=500)
    p.add_argument("--motif-len", type=int, default=10)
    p.add_argument("--alphabet", default="ACGT")
    p.add_argument("--output", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputFormatError, OSError) as exc:
        print(f"alignfm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"alignfm: contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
