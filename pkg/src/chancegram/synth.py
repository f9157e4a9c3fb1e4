"""Synthetic corpora for demos, tests and calibration runs.

Real corpora are out of scope here; these generators produce streams with
the two properties the toolkit cares about: a Zipf-like unigram
distribution (so frequent-word n-grams arise by chance) and, optionally,
planted collocations whose components co-occur far above chance.
"""

from __future__ import annotations

import numpy as np

from .corpus import NONWORD, WORD, TokenStream, ingest_vertical

PUNCT = (",", ".", "?", "!", ";")


def _zipf_weights(vocab_size: int, exponent: float) -> np.ndarray:
    w = 1.0 / np.arange(1, vocab_size + 1, dtype=np.float64) ** exponent
    return w / w.sum()


def _word(i: int) -> str:
    return f"w{i:04d}"


def zipf_stream(
    n_tokens: int,
    vocab_size: int = 200,
    exponent: float = 1.2,
    seed: int = 0,
    nonword_rate: float = 0.0,
) -> TokenStream:
    """A stream of independent draws from a Zipf-like unigram distribution.

    Under this construction no n-gram is genuinely associated; whatever
    repetition shows up is chance.  ``nonword_rate`` mixes punctuation
    tokens in, which interrupt word runs.
    """
    rng = np.random.default_rng(seed)
    words = rng.choice(vocab_size, size=n_tokens, p=_zipf_weights(vocab_size, exponent))
    pairs = []
    nonword = rng.random(n_tokens) < nonword_rate if nonword_rate > 0 else None
    for i in range(n_tokens):
        if nonword is not None and nonword[i]:
            pairs.append((PUNCT[int(words[i]) % len(PUNCT)], NONWORD))
        else:
            pairs.append((_word(int(words[i])), WORD))
    return ingest_vertical(pairs)


def planted_stream(
    n_tokens: int = 100_000,
    vocab_size: int = 5000,
    exponent: float = 0.95,
    n_planted: int = 150,
    occurrences: tuple[int, int] = (5, 40),
    n_planted_frequent: int = 40,
    boost: tuple[float, float] = (1.3, 2.5),
    nonword_rate: float = 0.02,
    seed: int = 0,
) -> TokenStream:
    """Zipf background plus two populations of planted collocation pairs.

    ``n_planted`` pairs join mid-frequency word types and are spliced in
    ``occurrences`` times each: observed count far above expected, so
    every measure flags them.  ``n_planted_frequent`` pairs join frequent
    word types and are spliced in at ``boost`` times their expected
    count: genuinely associated, but with the modest observed/expected
    ratio that separates effect-size measures (which under-rank them in
    favour of rare chance pairs) from the hypothesis-test measures.  The
    background still produces frequent chance bigrams of top-ranked
    words, which is what separates raw frequency from everything else.
    """
    rng = np.random.default_rng(seed)
    weights = _zipf_weights(vocab_size, exponent)
    n_planted_tokens = 0
    plants = []
    lo, hi = occurrences
    for _ in range(n_planted):
        a = int(rng.integers(50, vocab_size // 2))
        b = int(rng.integers(50, vocab_size // 2))
        reps = int(rng.integers(lo, hi + 1))
        plants.append((a, b, reps))
        n_planted_tokens += 2 * reps
    for _ in range(n_planted_frequent):
        a = int(rng.integers(2, 80))
        b = int(rng.integers(2, 80))
        expected = n_tokens * float(weights[a]) * float(weights[b])
        if expected < 2.5:
            continue
        reps = max(3, int(round(expected * rng.uniform(*boost))))
        plants.append((a, b, reps))
        n_planted_tokens += 2 * reps
    n_background = max(n_tokens - n_planted_tokens, 1)
    background = rng.choice(vocab_size, size=n_background, p=weights)
    nonword = rng.random(n_background) < nonword_rate

    # splice each planted occurrence at a random background position
    inserts: list[tuple[int, int, int]] = []
    for a, b, reps in plants:
        for pos in rng.integers(0, n_background, size=reps):
            inserts.append((int(pos), a, b))
    inserts.sort(key=lambda t: t[0])

    pairs = []
    next_insert = 0
    for i in range(n_background):
        while next_insert < len(inserts) and inserts[next_insert][0] == i:
            _, a, b = inserts[next_insert]
            pairs.append((_word(a), WORD))
            pairs.append((_word(b), WORD))
            next_insert += 1
        if nonword[i]:
            pairs.append((PUNCT[int(background[i]) % len(PUNCT)], NONWORD))
        else:
            pairs.append((_word(int(background[i])), WORD))
    while next_insert < len(inserts):
        _, a, b = inserts[next_insert]
        pairs.append((_word(a), WORD))
        pairs.append((_word(b), WORD))
        next_insert += 1
    return ingest_vertical(pairs)
