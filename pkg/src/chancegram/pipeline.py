"""End-to-end orchestration: ingest, count, score, permtest, holm, evaluate.

Every intermediate file starts with a header embedding a hash of the run
configuration and the corpus bytes, so stages refuse inputs produced by a
different run.  Stages whose outputs already exist with the right hash
are skipped, which makes interrupted runs resumable.  The whole pipeline
is a pure function of (corpus bytes, config): reports are byte-identical
across reruns and across worker counts.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import dataclass, fields

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import evaluate as ev
from . import measures, multitest, ngram, permute
from .corpus import HEADER_PREFIX, TokenStream, ingest_plain, read_header, read_token_file, write_token_file

STAGES = ("ingest", "count", "score", "permtest", "holm", "evaluate")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass
class RunConfig:
    corpus: str
    corpus_format: str = "plain"
    out_dir: str = "run"
    lengths: tuple[int, ...] = (2, 3)
    min_freq: int = 3
    permutations: int = 10_000
    master_seed: int = 0
    alpha: float = 0.05
    estimator: str = "addone"
    tie_break: str = "freq"
    n_definition: str = "tokens"
    mi3_uncorrected: bool = False
    workers: int = 1
    checkpoint_every: int | None = None

    def __post_init__(self) -> None:
        self.lengths = tuple(int(n) for n in self.lengths)
        if self.permutations < 1:
            raise ValueError("permutations must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0,1)")
        if self.corpus_format not in ("plain", "vertical"):
            raise ValueError(f"unknown corpus format {self.corpus_format!r}")
        if self.estimator not in permute.ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")


_COERCERS = {
    "lengths": lambda v: tuple(int(x) for x in str(v).split(",")),
    "min_freq": int,
    "permutations": int,
    "master_seed": int,
    "alpha": float,
    "workers": int,
    "checkpoint_every": lambda v: None if v in ("", "none", None) else int(v),
    "mi3_uncorrected": lambda v: v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes"),
}


def load_config(path: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Read a TOML run file, then apply key=value overrides on top."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    if overrides:
        raw.update(overrides)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "corpus" not in raw:
        raise ValueError("config must set 'corpus'")
    cooked = {k: (_COERCERS[k](v) if k in _COERCERS else v) for k, v in raw.items()}
    return RunConfig(**cooked)


def config_hash(config: RunConfig, corpus_bytes: bytes) -> str:
    """Run identity: semantic parameters plus the corpus bytes.

    Worker count, checkpointing cadence and output paths never change the
    result, so they stay out of the hash.
    """
    semantic = {
        "corpus_format": config.corpus_format,
        "lengths": list(config.lengths),
        "min_freq": config.min_freq,
        "permutations": config.permutations,
        "master_seed": config.master_seed,
        "alpha": config.alpha,
        "estimator": config.estimator,
        "tie_break": config.tie_break,
        "n_definition": config.n_definition,
        "mi3_uncorrected": config.mi3_uncorrected,
    }
    h = hashlib.sha256()
    h.update(json.dumps(semantic, sort_keys=True).encode())
    h.update(corpus_bytes)
    return h.hexdigest()[:12]


@dataclass
class _Paths:
    out: str

    @property
    def tok(self) -> str:
        return os.path.join(self.out, "corpus.tok")

    def counts(self, n: int) -> str:
        return os.path.join(self.out, f"ngrams.{n}.counts")

    def scores(self, n: int) -> str:
        return os.path.join(self.out, f"ngrams.{n}.scores")

    @property
    def pvals(self) -> str:
        return os.path.join(self.out, "ngrams.pvals")

    @property
    def sig(self) -> str:
        return os.path.join(self.out, "ngrams.sig")

    @property
    def report(self) -> str:
        return os.path.join(self.out, "report.json")

    @property
    def pr_dir(self) -> str:
        return os.path.join(self.out, "pr")

    @property
    def checkpoint(self) -> str:
        return os.path.join(self.out, "permtest.ckpt")


def _header(hash_: str) -> str:
    return f"{HEADER_PREFIX} config={hash_}"


def _valid_output(path: str, hash_: str) -> bool:
    return os.path.exists(path) and read_header(path) == _header(hash_)


def _require_input(path: str, hash_: str, stage: str) -> None:
    if not os.path.exists(path):
        raise PipelineError(stage, f"missing input {path}")
    if read_header(path) != _header(hash_):
        raise PipelineError(stage, f"{path} was produced by a different run config")


def _log(progress: bool, message: str) -> None:
    if progress:
        print(message, file=sys.stderr, flush=True)


def run_pipeline(config: RunConfig, progress: bool = False) -> ev.EvalReport:
    """Run all stages in order, skipping those with valid outputs."""
    try:
        with open(config.corpus, "rb") as fh:
            corpus_bytes = fh.read()
    except OSError as exc:
        raise PipelineError("ingest", f"cannot read corpus: {exc}") from exc
    hash_ = config_hash(config, corpus_bytes)
    header = _header(hash_)
    paths = _Paths(config.out_dir)
    os.makedirs(paths.out, exist_ok=True)

    # ingest
    if _valid_output(paths.tok, hash_):
        _log(progress, f"ingest: {paths.tok} up to date, skipping")
    else:
        _log(progress, f"ingest: {config.corpus} -> {paths.tok}")
        try:
            if config.corpus_format == "plain":
                stream = ingest_plain(corpus_bytes.decode("utf-8"))
            else:
                stream = read_token_file(config.corpus)
            write_token_file(stream, paths.tok, header=header)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError("ingest", str(exc)) from exc

    # count
    count_paths = [paths.counts(n) for n in config.lengths]
    if all(_valid_output(p, hash_) for p in count_paths):
        _log(progress, "count: outputs up to date, skipping")
    else:
        _require_input(paths.tok, hash_, "count")
        try:
            stream = read_token_file(paths.tok)
            for n in config.lengths:
                table = ngram.extract(stream, n, config.min_freq)
                ngram.write_counts(table, stream.vocab, paths.counts(n), header=header)
                _log(progress, f"count: {len(table.entries)} {n}-grams -> {paths.counts(n)}")
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError("count", str(exc)) from exc

    # score
    score_paths = [paths.scores(n) for n in config.lengths]
    if all(_valid_output(p, hash_) for p in score_paths):
        _log(progress, "score: outputs up to date, skipping")
    else:
        _require_input(paths.tok, hash_, "score")
        try:
            stream = read_token_file(paths.tok)
            for n in config.lengths:
                _require_input(paths.counts(n), hash_, "score")
                counts = ngram.read_counts(paths.counts(n), stream.vocab)
                table = ngram.build_table(counts, stream, config.min_freq, n=n)
                records = measures.score_table(
                    table,
                    n_definition=config.n_definition,
                    mi3_corrected=not config.mi3_uncorrected,
                )
                measures.write_scores(records, stream.vocab, paths.scores(n), header=header)
                _log(progress, f"score: {len(records)} {n}-grams -> {paths.scores(n)}")
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError("score", str(exc)) from exc

    # permtest
    if _valid_output(paths.pvals, hash_):
        _log(progress, "permtest: output up to date, skipping")
    else:
        _require_input(paths.tok, hash_, "permtest")
        try:
            stream = read_token_file(paths.tok)
            tables = {}
            for n in config.lengths:
                _require_input(paths.counts(n), hash_, "permtest")
                counts = ngram.read_counts(paths.counts(n), stream.vocab)
                tables[n] = ngram.build_table(counts, stream, config.min_freq, n=n)
            plan = permute.PermutationPlan(
                permutations=config.permutations,
                master_seed=config.master_seed,
                lengths=config.lengths,
                min_freq=config.min_freq,
            )
            ckpt = paths.checkpoint if config.checkpoint_every else None
            try:
                tally = permute.run(
                    stream,
                    plan,
                    tables,
                    workers=config.workers,
                    checkpoint_path=ckpt,
                    checkpoint_every=config.checkpoint_every,
                    progress=progress,
                )
            except ValueError as exc:
                if ckpt and "checkpoint" in str(exc) and os.path.exists(ckpt):
                    _log(progress, "permtest: discarding stale checkpoint")
                    os.unlink(ckpt)
                    tally = permute.run(
                        stream,
                        plan,
                        tables,
                        workers=config.workers,
                        checkpoint_path=ckpt,
                        checkpoint_every=config.checkpoint_every,
                        progress=progress,
                    )
                else:
                    raise
            pvts = permute.pvalue_tables(tally, tables, estimator=config.estimator)
            permute.write_pvalues(pvts, stream.vocab, paths.pvals, header=header)
            _log(progress, f"permtest: {config.permutations} permutations -> {paths.pvals}")
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError("permtest", str(exc)) from exc

    # holm
    if _valid_output(paths.sig, hash_):
        _log(progress, "holm: output up to date, skipping")
    else:
        _require_input(paths.pvals, hash_, "holm")
        try:
            pvts = permute.read_pvalues(paths.pvals)
            sigs = multitest.apply_holm(pvts, alpha=config.alpha)
            multitest.write_significance(pvts, sigs, None, paths.sig, header=header)
            n_sig = sum(len(s.significant_keys()) for s in sigs.values())
            _log(progress, f"holm: {n_sig} significant n-grams -> {paths.sig}")
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError("holm", str(exc)) from exc

    # evaluate
    if os.path.exists(paths.report) and os.path.isdir(paths.pr_dir):
        try:
            with open(paths.report, encoding="utf-8") as fh:
                existing = json.load(fh)
        except (OSError, json.JSONDecodeError):
            existing = None
        if existing and existing.get("config_hash") == hash_:
            _log(progress, "evaluate: report up to date, skipping")
            return _report_from_dict(existing)

    _require_input(paths.sig, hash_, "evaluate")
    try:
        sigs = multitest.read_significance(paths.sig)
        report = ev.EvalReport()
        for n in config.lengths:
            _require_input(paths.scores(n), hash_, "evaluate")
            rows = [
                (key, observed, scores)
                for key, observed, _expected, scores in measures.read_scores(paths.scores(n))
            ]
            if not rows:
                # nothing survived the frequency threshold at this length
                report.lengths[n] = ev.LengthEval(n=n, n_types=0, n_sig=0, baseline_ap=0.0)
                continue
            gold = sigs[n].significant_keys() if n in sigs else set()
            report.lengths[n] = ev.evaluate_length(
                rows, gold, n, tie_break=config.tie_break
            )
        ev.write_report(report, paths.report, config_hash=hash_)
        ev.write_pr_curves(report, paths.pr_dir)
        _log(progress, f"evaluate: report -> {paths.report}")
        return report
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("evaluate", str(exc)) from exc


def _report_from_dict(payload: dict) -> ev.EvalReport:
    report = ev.EvalReport()
    for n_str, le in payload.get("lengths", {}).items():
        length_eval = ev.LengthEval(
            n=int(n_str),
            n_types=le["n_types"],
            n_sig=le["n_sig"],
            baseline_ap=le["baseline_ap"],
        )
        for name, me in le.get("measures", {}).items():
            length_eval.measures[name] = ev.MeasureEval(
                ap=me["ap"],
                ccap=me["ccap"],
                first_reject_recall=me["first_reject_recall"],
                pr_points=[],
            )
        report.lengths[int(n_str)] = length_eval
    return report
