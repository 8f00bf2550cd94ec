"""Command-line entry point: ``mrfir {ingest,index,query,evaluate,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .classic4 import load_classic4
from .corpus import Collection, ParseError
from .evaluation import write_ap_tsv, write_pr_csv, write_summary_json, write_sweep_csv
from .experiment import MODELS, Experiment, load_corpus, save_corpus, sweep_k
from .linalg import SvdFactors
from .lsa import DOC_SPACES, LsaIndex
from .mrf import MrfParameters, doc_scores
from .snapshot import SnapshotError, load_snapshot, save_snapshot
from .vsm import TF_SCHEMES, RankedList

log = logging.getLogger("mrfir")

_MODEL_KIND = "model"


class CliError(Exception):
    """Reported on stderr with exit status 1."""


class UsageError(CliError):
    """Bad flag values argparse cannot check; exit status 2."""


def _load_experiment(path, args) -> Experiment:
    path = Path(path)
    if path.is_dir():
        return Experiment.build(
            load_classic4(path), args.min_term_len, args.max_df, getattr(args, "tf", "raw")
        )
    if not path.exists():
        raise CliError(f"corpus not found: {path}")
    return load_corpus(path)


def _parse_k_spec(spec: str | None) -> dict | int | None:
    """``"200"`` -> 200; ``"MED=100,CRAN=600"`` -> {Collection.MED: 100, ...}."""
    if spec is None:
        return None
    spec = spec.strip()
    if "=" not in spec:
        return int(spec)
    out = {}
    for part in spec.split(","):
        name, _, value = part.partition("=")
        out[Collection(name.strip().upper())] = int(value)
    return out


def _k_for(spec, collection: Collection) -> int:
    if isinstance(spec, dict):
        if collection not in spec:
            raise CliError(f"no k given for collection {collection.value}")
        return spec[collection]
    return spec


def _parse_k_values(text: str) -> list[int]:
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        return list(range(start, stop + 1, step))
    return [int(x) for x in text.split(",") if x.strip()]


def _check_k(k, model: str) -> None:
    values = k.values() if isinstance(k, dict) else [k]
    for v in values:
        if v is None or v < 1:
            raise UsageError(f"--k must be >= 1 for model {model}")


# -- commands ----------------------------------------------------------------


def cmd_ingest(args) -> int:
    root = Path(args.corpus)
    if not root.is_dir():
        raise CliError(f"corpus directory not found: {root}")
    exp = Experiment.build(load_classic4(root), args.min_term_len, args.max_df, args.tf)
    out = Path(args.out or "corpus.snapshot")
    save_corpus(out, exp)
    report = {
        "snapshot": str(out),
        "documents": exp.n_docs,
        "terms": len(exp.vocab),
        "collections": exp.collection.report(),
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_index(args) -> int:
    model = args.model
    if model != "vsm":
        _check_k(args.k, model)
    exp = _load_experiment(args.corpus, args)
    header = {
        "model": model,
        "vocabulary_digest": exp.vocab.digest(),
        "n_terms": len(exp.vocab),
        "n_docs": exp.n_docs,
        "tf": exp.tf,
        "seed": args.seed,
    }
    if model == "vsm":
        header.update(k=None, weighting="tfidf")
        arrays = {"idf": exp.idf}
    elif model == "lsa":
        idx = exp.lsa_index(args.k, doc_space=args.doc_space, seed=args.seed)
        header.update(k=idx.k, requested_k=args.k, weighting="tfidf", doc_space=args.doc_space)
        arrays = {"U": idx.factors.U, "sigma": idx.factors.sigma, "V": idx.factors.V}
    else:
        p = exp.mrf_parameters(args.k, weighting=args.weighting, seed=args.seed)
        header.update(k=p.k, requested_k=args.k, weighting=args.weighting)
        f = p.factors
        arrays = {"U": f.U, "sigma": f.sigma, "V": f.V}
    out = Path(args.out or f"{model}.model")
    save_snapshot(out, _MODEL_KIND, header, arrays)
    print(json.dumps({"artifact": str(out), **{k: header[k] for k in ("model", "k", "weighting")}}))
    return 0


def _score(exp: Experiment, header: dict, arrays: dict, counts) -> np.ndarray:
    model = header["model"]
    if model == "vsm":
        return exp.vsm_scores(exp.query_matrix(counts, "tfidf"))
    factors = SvdFactors(arrays["U"], arrays["sigma"], arrays["V"])
    if model == "lsa":
        idx = LsaIndex(factors, header.get("doc_space", "V"))
        return exp.lsa_scores(idx, exp.query_matrix(counts, "tfidf"))
    if model == "mrf":
        return doc_scores(MrfParameters(factors=factors), exp.query_matrix(counts, "binary"))
    raise CliError(f"unknown model in artifact: {model!r}")


def cmd_query(args) -> int:
    exp = _load_experiment(args.corpus, args)
    header, arrays = load_snapshot(args.index, _MODEL_KIND)
    if header["vocabulary_digest"] != exp.vocab.digest():
        raise CliError(
            "model artifact was built from a different vocabulary "
            f"({header['vocabulary_digest'][:12]} vs {exp.vocab.digest()[:12]}); rebuild the index"
        )
    if args.query_id:
        coll, _, qid = args.query_id.partition(":")
        try:
            query = exp.collection.query(Collection(coll.upper()), int(qid))
        except (KeyError, ValueError):
            raise CliError(f"unknown query id {args.query_id!r}") from None
        text, label = query.text, f"{query.collection.value}:{query.id}"
    else:
        text, label = args.text, "text"
    counts = exp.encode_queries([text])
    if counts.nnz == 0:
        log.warning("no query term is in the vocabulary; all documents score equally")
    scores = _score(exp, header, arrays, counts)[:, 0]
    ranked = RankedList.from_scores(label, scores, top_n=args.top_n)
    lines = ["query_id\trank\tdoc_id\tscore"]
    for rank, (d, s) in enumerate(ranked.entries(), start=1):
        lines.append(f"{label}\t{rank}\t{exp.collection.doc_key(d)}\t{s:.6f}")
    output = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(output)
    else:
        sys.stdout.write(output)
    return 0


def _collections(exp: Experiment, names) -> list[Collection]:
    available = [c for c in exp.collection.collections if exp.collection.queries.get(c)]
    if names:
        chosen = [Collection(n.upper()) for n in names]
        missing = [c.value for c in chosen if c not in available]
        if missing:
            raise CliError(f"collections without documents/queries: {missing}")
        available = chosen
    for c in available:
        if len(exp.collection.qrels.get(c, ())) == 0:
            raise CliError(f"no relevance judgments for collection {c.value}")
    return available


def cmd_evaluate(args) -> int:
    models = args.model or list(MODELS)
    k_default = _parse_k_spec(args.k)
    k_for_model = {
        "lsa": _parse_k_spec(args.lsa_k) if args.lsa_k else k_default,
        "mrf": _parse_k_spec(args.mrf_k) if args.mrf_k else k_default,
    }
    for m in models:
        if m != "vsm":
            _check_k(k_for_model[m], m)
    exp = _load_experiment(args.corpus, args)
    out = Path(args.out or "results")
    runs = []
    for coll in _collections(exp, args.collections):
        for m in models:
            k = None if m == "vsm" else _k_for(k_for_model[m], coll)
            run = exp.run(m, coll, k, weighting=args.weighting, doc_space=args.doc_space, seed=args.seed)
            tag = f"{m}_{coll.value.lower()}"
            write_ap_tsv(out / f"ap_{tag}.tsv", sorted(run.ap.items()))
            if run.curve is not None:
                write_pr_csv(out / f"pr_{tag}.csv", run.curve)
            runs.append(run.summary())
            log.info("%s %s k=%s MAP=%.4f", m, coll.value, k, run.map)
    write_summary_json(out / "summary.json", runs)
    print(json.dumps(runs, indent=2))
    return 0


def cmd_sweep(args) -> int:
    models = args.model or ["lsa", "mrf"]
    if "vsm" in models:
        raise UsageError("sweeps apply to lsa and mrf only")
    k_values = _parse_k_values(args.k_values)
    if not k_values or min(k_values) < 1:
        raise UsageError("--k-values must be positive integers")
    exp = _load_experiment(args.corpus, args)
    out = Path(args.out or "results")
    summary = []
    for coll in _collections(exp, args.collections):
        for m in models:
            res = sweep_k(exp, m, coll, k_values, weighting=args.weighting,
                          doc_space=args.doc_space, seed=args.seed)
            write_sweep_csv(out / f"sweep_{m}_{coll.value.lower()}.csv", res)
            entry = {"model": m, "collection": coll.value, "rows": res.rows,
                     "failures": {str(k): v for k, v in res.failures.items()}}
            if res.rows:
                entry["best_k"], entry["best_map"] = res.best()
            summary.append(entry)
    write_summary_json(out / "sweep_summary.json", summary)
    print(json.dumps(summary, indent=2))
    if any(s["failures"] for s in summary):
        return 1
    return 0


# -- argument parsing --------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="Classic4 directory or corpus snapshot")
    p.add_argument("--min-term-len", type=int, default=3)
    p.add_argument("--max-df", type=float, default=0.95)
    p.add_argument("--tf", choices=TF_SCHEMES, default="raw", help="tf variant for tf-idf")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrfir", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a corpus directory into a snapshot")
    _common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build a VSM/LSA/MRF model artifact")
    _common(p)
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--weighting", choices=("count", "tfidf"), default="tfidf",
                   help="MRF learning input weighting")
    p.add_argument("--doc-space", choices=DOC_SPACES, default="V")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="rank documents for one query")
    _common(p)
    p.add_argument("--index", required=True, help="model artifact from 'index'")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--text")
    g.add_argument("--query-id", help="COLLECTION:ID, e.g. MED:1")
    p.add_argument("--top-n", type=int, default=20)
    p.set_defaults(func=cmd_query)

    for name, func, helptext in (
        ("evaluate", cmd_evaluate, "MAP and PR curves per model and collection"),
        ("sweep", cmd_sweep, "MAP over a range of k"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--model", choices=MODELS, action="append")
        p.add_argument("--weighting", choices=("count", "tfidf"), default="tfidf")
        p.add_argument("--doc-space", choices=DOC_SPACES, default="V")
        p.add_argument("--collections", nargs="+")
        if name == "evaluate":
            p.add_argument("--k", help="k for LSA/MRF: '200' or 'MED=100,CRAN=600,...'")
            p.add_argument("--lsa-k")
            p.add_argument("--mrf-k")
        else:
            p.add_argument("--k-values", default="100:1200:100",
                           help="'start:stop:step' (inclusive) or a comma list")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mrfir {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (CliError, ParseError, SnapshotError, FileNotFoundError, ValueError) as exc:
        print(f"mrfir {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
