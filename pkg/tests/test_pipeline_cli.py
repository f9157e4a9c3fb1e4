import json
import os

import pytest

from chancegram.cli import STAGE_EXIT_CODES, main
from chancegram.corpus import read_header, write_token_file
from chancegram.pipeline import PipelineError, RunConfig, config_hash, load_config, run_pipeline
from chancegram.synth import zipf_stream


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "tiny.tok"
    stream = zipf_stream(3000, vocab_size=60, exponent=1.1, seed=5, nonword_rate=0.05)
    write_token_file(stream, str(path))
    return str(path)


def config_for(corpus_file, out_dir, **kw):
    defaults = dict(
        corpus=corpus_file,
        corpus_format="vertical",
        out_dir=out_dir,
        lengths=(2, 3),
        min_freq=3,
        permutations=300,
        master_seed=7,
        alpha=0.05,
    )
    defaults.update(kw)
    return RunConfig(**defaults)


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestPipeline:
    def test_end_to_end_outputs(self, corpus_file, tmp_path):
        out = str(tmp_path / "out")
        report = run_pipeline(config_for(corpus_file, out))
        assert set(report.lengths) == {2, 3}
        for name in ("corpus.tok", "ngrams.2.counts", "ngrams.3.counts",
                     "ngrams.2.scores", "ngrams.3.scores", "ngrams.pvals",
                     "ngrams.sig", "report.json"):
            assert os.path.exists(os.path.join(out, name)), name
        payload = json.loads(read_bytes(os.path.join(out, "report.json")))
        assert set(payload["lengths"]) == {"2", "3"}

    def test_reports_byte_identical_across_runs_and_workers(self, corpus_file, tmp_path):
        blobs = []
        for i, workers in enumerate((1, 4, 8)):
            out = str(tmp_path / f"out{i}")
            run_pipeline(config_for(corpus_file, out, workers=workers))
            blobs.append(
                (
                    read_bytes(os.path.join(out, "report.json")),
                    read_bytes(os.path.join(out, "ngrams.pvals")),
                    read_bytes(os.path.join(out, "ngrams.sig")),
                )
            )
        assert blobs[0] == blobs[1] == blobs[2]

    def test_resume_skips_valid_stages_and_rebuilds_report(self, corpus_file, tmp_path):
        out = str(tmp_path / "out")
        cfg = config_for(corpus_file, out)
        run_pipeline(cfg)
        first = read_bytes(os.path.join(out, "report.json"))
        pvals_mtime = os.path.getmtime(os.path.join(out, "ngrams.pvals"))
        os.unlink(os.path.join(out, "report.json"))
        run_pipeline(cfg)
        assert read_bytes(os.path.join(out, "report.json")) == first
        # permtest was not rerun
        assert os.path.getmtime(os.path.join(out, "ngrams.pvals")) == pvals_mtime

    def test_changed_config_invalidates_outputs(self, corpus_file, tmp_path):
        out = str(tmp_path / "out")
        run_pipeline(config_for(corpus_file, out))
        h1 = read_header(os.path.join(out, "ngrams.pvals"))
        run_pipeline(config_for(corpus_file, out, master_seed=8))
        h2 = read_header(os.path.join(out, "ngrams.pvals"))
        assert h1 != h2

    def test_mismatched_file_never_consumed(self, corpus_file, tmp_path):
        # a file carrying another run's hash is treated as stale and
        # rebuilt, not fed to the next stage
        out = str(tmp_path / "out")
        cfg = config_for(corpus_file, out)
        run_pipeline(cfg)
        report = read_bytes(os.path.join(out, "report.json"))
        pvals = os.path.join(out, "ngrams.pvals")
        good_header = read_header(pvals)
        lines = open(pvals).read().splitlines()
        lines[0] = "#% chancegram config=000000000000"
        lines[1] = "corrupted corrupted\t9999\t0\t300\t0.001"
        with open(pvals, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.unlink(os.path.join(out, "ngrams.sig"))
        os.unlink(os.path.join(out, "report.json"))
        run_pipeline(cfg)
        assert read_header(pvals) == good_header
        assert "corrupted" not in open(pvals).read()
        assert read_bytes(os.path.join(out, "report.json")) == report

    def test_missing_corpus_fails_at_ingest(self, tmp_path):
        cfg = config_for(str(tmp_path / "gone.tok"), str(tmp_path / "out"))
        with pytest.raises(PipelineError) as err:
            run_pipeline(cfg)
        assert err.value.stage == "ingest"

    def test_config_hash_ignores_workers(self, corpus_file):
        blob = read_bytes(corpus_file)
        a = config_hash(config_for(corpus_file, "x", workers=1), blob)
        b = config_hash(config_for(corpus_file, "y", workers=8), blob)
        assert a == b
        c = config_hash(config_for(corpus_file, "x", master_seed=99), blob)
        assert c != a

    def test_lengths_sections_match_config(self, corpus_file, tmp_path):
        out = str(tmp_path / "out")
        report = run_pipeline(config_for(corpus_file, out, lengths=(2,)))
        assert set(report.lengths) == {2}


class TestConfigFile:
    def test_load_and_override(self, corpus_file, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(
            f'corpus = "{corpus_file}"\n'
            'corpus_format = "vertical"\n'
            'out_dir = "out"\n'
            'lengths = "2,3"\n'
            "permutations = 100\n"
            "master_seed = 1\n"
        )
        cfg = load_config(str(path), {"permutations": "250", "lengths": "2"})
        assert cfg.permutations == 250
        assert cfg.lengths == (2,)
        assert cfg.corpus == corpus_file

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('corpus = "x"\nbogus = 1\n')
        with pytest.raises(ValueError, match="bogus"):
            load_config(str(path))

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(corpus="x", permutations=0)
        with pytest.raises(ValueError):
            RunConfig(corpus="x", alpha=1.5)
        with pytest.raises(ValueError):
            RunConfig(corpus="x", corpus_format="xml")
        with pytest.raises(ValueError):
            RunConfig(corpus="x", estimator="guess")


class TestCli:
    def test_subcommand_chain(self, corpus_file, tmp_path, capsys):
        d = str(tmp_path)
        tok = os.path.join(d, "c.tok")
        assert main(["ingest", "--format", "vertical", "--in", corpus_file, "--out", tok]) == 0
        assert main(["count", "--n", "2,3", "--min-freq", "3", "--in", tok,
                     "--out-prefix", os.path.join(d, "ng")]) == 0
        assert os.path.exists(os.path.join(d, "ng.2.counts"))
        assert main(["score", "--counts", os.path.join(d, "ng.2.counts"),
                     "--tokens", tok, "--out", os.path.join(d, "ng.2.scores")]) == 0
        assert main(["permtest", "--tokens", tok, "--counts", os.path.join(d, "ng"),
                     "--n", "2,3", "--permutations", "200", "--seed", "3",
                     "--out", os.path.join(d, "ng.pvals")]) == 0
        assert main(["holm", "--pvals", os.path.join(d, "ng.pvals"),
                     "--alpha", "0.05", "--out", os.path.join(d, "ng.sig")]) == 0
        assert main(["score", "--counts", os.path.join(d, "ng.3.counts"),
                     "--tokens", tok, "--out", os.path.join(d, "ng.3.scores")]) == 0
        scores = ",".join(os.path.join(d, f"ng.{n}.scores") for n in (2, 3))
        assert main(["evaluate", "--scores", scores, "--sig", os.path.join(d, "ng.sig"),
                     "--out-report", os.path.join(d, "report.json"),
                     "--out-pr-dir", os.path.join(d, "pr")]) == 0
        payload = json.loads(open(os.path.join(d, "report.json")).read())
        assert set(payload["lengths"]) == {"2", "3"}

    def test_oracle_fisher2(self, tmp_path, capsys):
        tok = str(tmp_path / "o.tok")
        from chancegram.corpus import ingest_plain

        write_token_file(ingest_plain("a b a b c c c c c c"), tok)
        assert main(["oracle", "fisher2", "--tokens", tok, "--bigram", "a b"]) == 0
        out = capsys.readouterr().out
        assert "p=" in out and "O=2" in out

    def test_oracle_enumerate(self, tmp_path, capsys):
        tok = str(tmp_path / "o.tok")
        from chancegram.corpus import ingest_plain

        write_token_file(ingest_plain("a b a b"), tok)
        assert main(["oracle", "enumerate", "--tokens", tok, "--ngram", "a b"]) == 0
        out = capsys.readouterr().out
        assert abs(float(out.strip().split("=")[1]) - 1 / 6) < 1e-12

    def test_run_command_and_reruns_identically(self, corpus_file, tmp_path, capsys):
        conf = tmp_path / "run.toml"
        out = str(tmp_path / "out")
        conf.write_text(
            f'corpus = "{corpus_file}"\n'
            'corpus_format = "vertical"\n'
            f'out_dir = "{out}"\n'
            'lengths = "2"\n'
            "permutations = 200\n"
            "master_seed = 42\n"
        )
        assert main(["run", "--config", str(conf), "--quiet"]) == 0
        first = read_bytes(os.path.join(out, "report.json"))
        os.unlink(os.path.join(out, "report.json"))
        assert main(["run", "--config", str(conf), "--quiet"]) == 0
        assert read_bytes(os.path.join(out, "report.json")) == first

    def test_run_bad_config_exit_code(self, tmp_path, capsys):
        conf = tmp_path / "run.toml"
        conf.write_text('corpus = "does-not-exist"\n')
        code = main(["run", "--config", str(conf), "--quiet"])
        assert code == STAGE_EXIT_CODES["ingest"]

    def test_run_stage_exit_codes_distinct(self):
        codes = list(STAGE_EXIT_CODES.values())
        assert len(codes) == len(set(codes))
        assert all(c != 0 for c in codes)

    def test_error_paths_return_one(self, tmp_path, capsys):
        assert main(["ingest", "--in", str(tmp_path / "nope"), "--out", str(tmp_path / "x")]) == 1
