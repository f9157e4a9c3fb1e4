import math
from collections import Counter

import numpy as np
import pytest

from chancegram.corpus import ingest_plain, ingest_vertical
from chancegram.exact import enumerate_exact
from chancegram.ngram import build_table, count_ngrams, extract
from chancegram.permute import (
    PermutationPlan,
    p_value,
    pvalue_tables,
    read_pvalues,
    run,
    shuffle_stream,
    tally_permutation,
    write_pvalues,
)


@pytest.fixture(scope="module")
def abab():
    return ingest_plain("a b a b")


class TestShuffle:
    def test_single_token_stream(self):
        stream = ingest_plain("a")
        for seed in (0, 7, 123456):
            assert shuffle_stream(stream, seed, 0).tolist() == [0]

    def test_two_tokens_uniform(self):
        stream = ingest_plain("a b")
        draws = 10_000
        unchanged = sum(
            shuffle_stream(stream, 99, i)[0] == 0 for i in range(draws)
        )
        sigma = math.sqrt(0.25 / draws)
        assert abs(unchanged / draws - 0.5) <= 3 * sigma

    def test_deterministic(self, abab):
        one = shuffle_stream(abab, 42, 17)
        two = shuffle_stream(abab, 42, 17)
        assert np.array_equal(one, two)

    def test_distinct_indices_differ(self, abab):
        outs = {tuple(shuffle_stream(abab, 42, i)) for i in range(50)}
        assert len(outs) > 1

    def test_marginals_preserved(self):
        stream = ingest_plain("a a b c c c , . 9")
        for i in range(25):
            permuted = shuffle_stream(stream, 5, i)
            assert Counter(permuted.tolist()) == Counter(stream.tokens.tolist())

    def test_all_permutations_equally_likely(self):
        # 4 distinct tokens: chi-square over the 24 permutations
        stream = ingest_plain("a b c d")
        counts = Counter(tuple(shuffle_stream(stream, 3, i)) for i in range(24_000))
        assert len(counts) == 24
        expected = 24_000 / 24
        chi2 = sum((v - expected) ** 2 / expected for v in counts.values())
        assert chi2 < 50  # 23 dof; P(chi2 > 49.7) ~ 0.001


class TestTallyPermutation:
    def test_identity_permutation_reproduces_observed(self):
        stream = ingest_plain("a b a b c , a b x")
        tables = {n: extract(stream, n, 1) for n in (2, 3)}
        out = tally_permutation(stream.tokens, stream.vocab, tables)
        for n in (2, 3):
            assert out[n] == tables[n].entries

    def test_hand_counted_rearrangement(self):
        stream = ingest_plain("a a b b")
        tables = {2: extract(stream, 2, 1)}
        key = (stream.vocab.id_of("a"), stream.vocab.id_of("b"))
        permuted = np.array(
            [stream.vocab.id_of("a"), stream.vocab.id_of("b")] * 2, dtype=np.int32
        )
        out = tally_permutation(permuted, stream.vocab, tables)
        assert out[2][key] == 2

    def test_absent_key_counts_zero(self):
        stream = ingest_plain("a b c d")
        tables = {2: extract(stream, 2, 1)}
        permuted = stream.tokens[::-1].copy()
        out = tally_permutation(permuted, stream.vocab, tables)
        key = (stream.vocab.id_of("a"), stream.vocab.id_of("b"))
        assert out[2][key] == 0

    def test_nonword_interrupts_in_permuted_order(self):
        stream = ingest_plain("a b ,")
        tables = {2: extract(stream, 2, 1)}
        key = (stream.vocab.id_of("a"), stream.vocab.id_of("b"))
        comma = stream.vocab.id_of(",")
        permuted = np.array([stream.vocab.id_of("a"), comma, stream.vocab.id_of("b")], np.int32)
        assert tally_permutation(permuted, stream.vocab, tables)[2][key] == 0


class TestRun:
    def test_exceedance_includes_equality(self, abab):
        tables = {2: extract(abab, 2, 1)}
        plan = PermutationPlan(permutations=1, master_seed=0, lengths=(2,), min_freq=1)
        tally = run(abab, plan, tables)
        ref = tally_permutation(shuffle_stream(abab, 0, 0), abab.vocab, tables)
        key = (abab.vocab.id_of("a"), abab.vocab.id_of("b"))
        expected = 1 if ref[2][key] >= tables[2].entries[key] else 0
        assert tally.exceedances[2][key] == expected

    def test_abab_converges_to_sixth(self, abab):
        tables = {2: extract(abab, 2, 1)}
        plan = PermutationPlan(permutations=30_000, master_seed=11, lengths=(2,), min_freq=1)
        tally = run(abab, plan, tables)
        key = (abab.vocab.id_of("a"), abab.vocab.id_of("b"))
        p_hat = tally.exceedances[2][key] / plan.permutations
        p_exact = enumerate_exact(abab, key)
        assert p_exact == pytest.approx(1 / 6)
        sigma = math.sqrt(p_exact * (1 - p_exact) / plan.permutations)
        assert abs(p_hat - p_exact) <= 3 * sigma

    def test_kernel_matches_reference_tally(self):
        rng = np.random.default_rng(31)
        vocabulary = ["a", "b", "c", "d", ",", "."]
        classes = ["W", "W", "W", "W", "N", "N"]
        for trial in range(25):
            size = int(rng.integers(4, 40))
            idx = rng.integers(0, len(vocabulary), size)
            pairs = [(vocabulary[i], classes[i]) for i in idx]
            if all(c == "N" for _, c in pairs):
                pairs[0] = ("a", "W")
            stream = ingest_vertical(pairs)
            tables = {n: extract(stream, n, 1) for n in (2, 3, 4)}
            tables = {n: t for n, t in tables.items() if t.entries}
            if not tables:
                continue
            plan = PermutationPlan(
                permutations=40,
                master_seed=trial,
                lengths=tuple(tables),
                min_freq=1,
            )
            tally = run(stream, plan, tables)
            ref = {n: {k: 0 for k in t.entries} for n, t in tables.items()}
            for i in range(plan.permutations):
                permuted = shuffle_stream(stream, trial, i)
                counts = tally_permutation(permuted, stream.vocab, tables)
                for n, t in tables.items():
                    for k, o in t.entries.items():
                        if counts[n][k] >= o:
                            ref[n][k] += 1
            assert tally.exceedances == ref

    def test_worker_count_invariance(self):
        stream = ingest_plain("a b a b c a c a b b , a c . b a a b c c")
        tables = {n: extract(stream, n, 2) for n in (2, 3)}
        tables = {n: t for n, t in tables.items() if t.entries}
        plan = PermutationPlan(permutations=500, master_seed=9, lengths=tuple(tables), min_freq=2)
        tallies = [run(stream, plan, tables, workers=w) for w in (1, 4, 8)]
        assert tallies[0].exceedances == tallies[1].exceedances == tallies[2].exceedances

    def test_checkpoint_resume_is_exact(self, tmp_path):
        stream = ingest_plain("a b a b c a c a b b a c b a a b c c")
        tables = {2: extract(stream, 2, 2)}
        plan = PermutationPlan(permutations=400, master_seed=3, lengths=(2,), min_freq=2)
        straight = run(stream, plan, tables)

        ckpt = str(tmp_path / "t.ckpt")

        class Interrupt(Exception):
            pass

        def die_after_first_chunk(done, total, rate):
            if done >= 100:
                raise Interrupt()

        with pytest.raises(Interrupt):
            run(
                stream,
                plan,
                tables,
                checkpoint_path=ckpt,
                checkpoint_every=100,
                progress=die_after_first_chunk,
            )
        resumed = run(stream, plan, tables, checkpoint_path=ckpt, checkpoint_every=100)
        assert resumed.permutations == plan.permutations
        assert resumed.exceedances == straight.exceedances

    def test_checkpoint_mismatch_refused(self, tmp_path):
        stream = ingest_plain("a b a b a b")
        tables = {2: extract(stream, 2, 1)}
        ckpt = str(tmp_path / "t.ckpt")
        plan = PermutationPlan(permutations=50, master_seed=1, lengths=(2,), min_freq=1)
        run(stream, plan, tables, checkpoint_path=ckpt, checkpoint_every=10)
        other = PermutationPlan(permutations=50, master_seed=2, lengths=(2,), min_freq=1)
        with pytest.raises(ValueError, match="checkpoint"):
            run(stream, other, tables, checkpoint_path=ckpt, checkpoint_every=10)

    def test_missing_table_rejected(self, abab):
        plan = PermutationPlan(permutations=5, master_seed=0, lengths=(2, 3), min_freq=1)
        with pytest.raises(ValueError, match="length 3"):
            run(abab, plan, {2: extract(abab, 2, 1)})


class TestPValue:
    def test_addone(self):
        assert p_value(0, 19, "addone") == pytest.approx(0.05)
        assert p_value(19, 19, "addone") == pytest.approx(1.0)

    def test_raw(self):
        assert p_value(5, 100, "raw") == pytest.approx(0.05)
        assert p_value(0, 100, "raw") == 0.0

    def test_bounds_checked(self):
        with pytest.raises(ValueError):
            p_value(6, 5)
        with pytest.raises(ValueError):
            p_value(-1, 5)
        with pytest.raises(ValueError):
            p_value(1, 5, "magic")

    def test_addone_never_zero(self):
        assert p_value(0, 10**6) > 0.0


def test_plan_validation():
    with pytest.raises(ValueError):
        PermutationPlan(permutations=0, master_seed=0)
    with pytest.raises(ValueError):
        PermutationPlan(permutations=1, master_seed=0, lengths=())
    with pytest.raises(ValueError):
        PermutationPlan(permutations=1, master_seed=0, lengths=(5,))


def test_pvalues_file_round_trip(tmp_path):
    stream = ingest_plain("a b a b c a c a b b a c b a a b c c")
    tables = {n: extract(stream, n, 2) for n in (2, 3)}
    tables = {n: t for n, t in tables.items() if t.entries}
    plan = PermutationPlan(permutations=200, master_seed=8, lengths=tuple(tables), min_freq=2)
    tally = run(stream, plan, tables)
    pvts = pvalue_tables(tally, tables, estimator="addone")
    path = str(tmp_path / "x.pvals")
    write_pvalues(pvts, stream.vocab, path)
    back = read_pvalues(path)
    for n, pvt in pvts.items():
        assert back[n].permutations == pvt.permutations
        for key, row in pvt.rows.items():
            surf = stream.vocab.surfaces(key)
            assert back[n].rows[surf].observed == row.observed
            assert back[n].rows[surf].exceedances == row.exceedances
            assert back[n].rows[surf].p_hat == row.p_hat
