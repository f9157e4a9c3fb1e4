"""Command-line interface.

    chancegram ingest    --format plain|vertical --in FILE --out FILE.tok
    chancegram count     --n 2,3 --min-freq 3 --in FILE.tok --out-prefix PFX
    chancegram score     --counts FILE --tokens FILE.tok --out FILE.scores
    chancegram permtest  --tokens FILE.tok --counts PFX --permutations P --seed S --out OUT.pvals
    chancegram holm      --pvals FILE --alpha 0.05 --out FILE.sig
    chancegram evaluate  --scores FILE[,FILE...] --sig FILE.sig --out-report R.json --out-pr-dir DIR
    chancegram oracle fisher2   --tokens FILE.tok --bigram "w1 w2"
    chancegram oracle enumerate --tokens FILE.tok --ngram "w1 w2 [w3 [w4]]"
    chancegram run       --config run.toml [--set key=value ...]

Exit codes: 0 success, 1 bad invocation or data error, and for ``run``
one distinct code per failing stage (ingest 10, count 11, score 12,
permtest 13, holm 14, evaluate 15).
"""

from __future__ import annotations

import argparse
import sys

from . import evaluate as ev
from . import exact, measures, multitest, ngram, permute, pipeline
from .corpus import ingest_plain, read_token_file, write_token_file

STAGE_EXIT_CODES = {stage: 10 + i for i, stage in enumerate(pipeline.STAGES)}


def _lengths(spec: str) -> list[int]:
    return [int(x) for x in spec.split(",") if x]


def _cmd_ingest(args) -> int:
    if args.format == "plain":
        with open(args.infile, encoding="utf-8") as fh:
            stream = ingest_plain(fh.read())
    else:
        stream = read_token_file(args.infile)
    write_token_file(stream, args.out)
    print(
        f"{stream.total_tokens} tokens ({stream.word_tokens} words, "
        f"{len(stream.vocab)} types) -> {args.out}",
        file=sys.stderr,
    )
    return 0


def _cmd_count(args) -> int:
    stream = read_token_file(args.tokens_in)
    for n in _lengths(args.n):
        table = ngram.extract(stream, n, args.min_freq)
        out = f"{args.out_prefix}.{n}.counts"
        ngram.write_counts(table, stream.vocab, out)
        print(f"{len(table.entries)} {n}-grams with count >= {args.min_freq} -> {out}", file=sys.stderr)
    return 0


def _cmd_score(args) -> int:
    stream = read_token_file(args.tokens)
    counts = ngram.read_counts(args.counts, stream.vocab)
    table = ngram.build_table(counts, stream, min(counts.values(), default=1))
    records = measures.score_table(
        table, n_definition=args.n_definition, mi3_corrected=not args.mi3_uncorrected
    )
    measures.write_scores(records, stream.vocab, args.out)
    print(f"{len(records)} records -> {args.out}", file=sys.stderr)
    return 0


def _cmd_permtest(args) -> int:
    stream = read_token_file(args.tokens)
    lengths = tuple(_lengths(args.n))
    tables = {}
    for n in lengths:
        counts = ngram.read_counts(f"{args.counts}.{n}.counts", stream.vocab)
        tables[n] = ngram.build_table(counts, stream, min(counts.values(), default=1), n=n)
    plan = permute.PermutationPlan(
        permutations=args.permutations,
        master_seed=args.seed,
        lengths=lengths,
        min_freq=min(t.min_freq for t in tables.values()),
    )
    tally = permute.run(
        stream,
        plan,
        tables,
        workers=args.workers,
        checkpoint_path=args.checkpoint,
        checkpoint_every=args.checkpoint_every,
        progress=True,
    )
    pvts = permute.pvalue_tables(tally, tables, estimator=args.estimator)
    permute.write_pvalues(pvts, stream.vocab, args.out)
    print(f"p-values -> {args.out}", file=sys.stderr)
    return 0


def _cmd_holm(args) -> int:
    pvts = permute.read_pvalues(args.pvals)
    sigs = multitest.apply_holm(pvts, alpha=args.alpha)
    multitest.write_significance(pvts, sigs, None, args.out)
    for n in sorted(sigs):
        print(
            f"{n}-grams: {len(sigs[n].significant_keys())}/{sigs[n].family_size} significant",
            file=sys.stderr,
        )
    return 0


def _cmd_evaluate(args) -> int:
    sigs = multitest.read_significance(args.sig)
    report = ev.EvalReport()
    for path in args.scores.split(","):
        rows = [
            (key, observed, scores)
            for key, observed, _expected, scores in measures.read_scores(path)
        ]
        if not rows:
            print(f"warning: no rows in {path}", file=sys.stderr)
            continue
        n = len(rows[0][0])
        gold = sigs[n].significant_keys() if n in sigs else set()
        report.lengths[n] = ev.evaluate_length(rows, gold, n, tie_break=args.tie_break)
    ev.write_report(report, args.out_report)
    ev.write_pr_curves(report, args.out_pr_dir)
    print(f"report -> {args.out_report}", file=sys.stderr)
    return 0


def _cmd_oracle_fisher2(args) -> int:
    stream = read_token_file(args.tokens)
    surfaces = args.bigram.split()
    if len(surfaces) != 2:
        print("fisher2 needs exactly two words", file=sys.stderr)
        return 1
    key = tuple(stream.vocab.id_of(s.lower()) for s in surfaces)
    counts = ngram.count_ngrams(stream, 2)
    o11 = counts.get(key, 0)
    f1 = int(stream.vocab.freqs[key[0]])
    f2 = int(stream.vocab.freqs[key[1]])
    table = exact.ContingencyTable2x2.from_margins(stream.total_tokens, f1, f2, o11)
    p = exact.fisher_exact_upper(table)
    print(f"O={o11}\tf1={f1}\tf2={f2}\tN={stream.total_tokens}\tp={p!r}")
    return 0


def _cmd_oracle_enumerate(args) -> int:
    stream = read_token_file(args.tokens)
    key = tuple(stream.vocab.id_of(s.lower()) for s in args.ngram.split())
    p = exact.enumerate_exact(stream, key)
    print(f"p={p!r}")
    return 0


def _cmd_run(args) -> int:
    overrides = {}
    for item in args.set or []:
        k, _, v = item.partition("=")
        if not _:
            print(f"bad override {item!r}, want key=value", file=sys.stderr)
            return 1
        overrides[k] = v
    try:
        config = pipeline.load_config(args.config, overrides)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        pipeline.run_pipeline(config, progress=not args.quiet)
    except pipeline.PipelineError as exc:
        print(f"pipeline failed at {exc}", file=sys.stderr)
        return STAGE_EXIT_CODES.get(exc.stage, 1)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chancegram",
        description="Permutation-test significance and association-measure evaluation for n-grams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="turn a corpus file into a token file")
    p.add_argument("--format", choices=("plain", "vertical"), default="plain")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("count", help="count n-grams over word runs")
    p.add_argument("--n", default="2,3", help="comma-separated lengths, e.g. 2,3,4")
    p.add_argument("--min-freq", type=int, default=3)
    p.add_argument("--in", dest="tokens_in", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("score", help="compute the six association measures")
    p.add_argument("--counts", required=True)
    p.add_argument("--tokens", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-definition", choices=("tokens", "words"), default="tokens")
    p.add_argument("--mi3-uncorrected", action="store_true")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("permtest", help="Monte Carlo permutation p-values")
    p.add_argument("--tokens", required=True)
    p.add_argument("--counts", required=True, help="counts file prefix (from count --out-prefix)")
    p.add_argument("--n", default="2,3")
    p.add_argument("--permutations", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=permute.ESTIMATORS, default="addone")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--checkpoint-every", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_permtest)

    p = sub.add_parser("holm", help="Holm multiple-testing correction per length")
    p.add_argument("--pvals", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_holm)

    p = sub.add_parser("evaluate", help="PR curves and (chance-corrected) average precision")
    p.add_argument("--scores", required=True, help="scores file, or comma-separated list")
    p.add_argument("--sig", required=True)
    p.add_argument("--out-report", required=True)
    p.add_argument("--out-pr-dir", required=True)
    p.add_argument("--tie-break", choices=ev.TIE_BREAKS, default="freq")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("oracle", help="closed-form and brute-force oracles")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    q = osub.add_parser("fisher2", help="Fisher's exact upper tail for a bigram")
    q.add_argument("--tokens", required=True)
    q.add_argument("--bigram", required=True, help='two words, e.g. "of the"')
    q.set_defaults(func=_cmd_oracle_fisher2)
    q = osub.add_parser("enumerate", help="exact p by enumerating tiny corpora")
    q.add_argument("--tokens", required=True)
    q.add_argument("--ngram", required=True, help='two to four words, e.g. "a b c"')
    q.set_defaults(func=_cmd_oracle_enumerate)

    p = sub.add_parser("run", help="run the whole pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
