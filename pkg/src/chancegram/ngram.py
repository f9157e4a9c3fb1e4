"""N-gram extraction and counting over uninterrupted word runs.

An n-gram window (n = 2..4) counts only when all n consecutive tokens are
words; any non-word token interrupts the run, so no window spans it.
Windows overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import HEADER_PREFIX, TokenStream, Vocabulary

MIN_N = 2
MAX_N = 4


@dataclass
class NgramTable:
    """Observed counts for one n-gram length, with unigram marginals.

    Marginals are full-stream word-token frequencies (unfiltered by the
    n-gram threshold); ``total_tokens`` includes non-word tokens.
    """

    n: int
    entries: dict[tuple[int, ...], int]
    marginals: dict[int, int]
    total_tokens: int
    word_tokens: int
    min_freq: int


def count_ngrams(stream: TokenStream, n: int) -> dict[tuple[int, ...], int]:
    """Count every window of n consecutive word tokens in the stream."""
    if not MIN_N <= n <= MAX_N:
        raise ValueError(f"n must be in {MIN_N}..{MAX_N}, got {n}")
    toks = stream.tokens
    size = toks.size
    if size < n:
        return {}
    isw = stream.position_word_mask()
    valid = isw[: size - n + 1].copy()
    for k in range(1, n):
        valid &= isw[k : size - n + 1 + k]
    if not valid.any():
        return {}
    vocab_size = len(stream.vocab)
    if vocab_size**n < 2**63:
        packed = toks[: size - n + 1].astype(np.int64)
        for k in range(1, n):
            packed = packed * vocab_size + toks[k : size - n + 1 + k]
        uniq, cnt = np.unique(packed[valid], return_counts=True)
        out: dict[tuple[int, ...], int] = {}
        for key, c in zip(uniq.tolist(), cnt.tolist()):
            ids = []
            for _ in range(n):
                ids.append(key % vocab_size)
                key //= vocab_size
            out[tuple(reversed(ids))] = c
        return out
    # huge-vocabulary fallback, same semantics
    out = {}
    idx = np.nonzero(valid)[0]
    for i in idx.tolist():
        key = tuple(int(t) for t in toks[i : i + n])
        out[key] = out.get(key, 0) + 1
    return out


def build_table(
    counts: dict[tuple[int, ...], int],
    stream: TokenStream,
    min_freq: int,
    n: int | None = None,
) -> NgramTable:
    """Apply the frequency threshold and attach marginals and corpus size.

    ``n`` may be omitted when ``counts`` is non-empty (inferred from keys).
    """
    if n is None:
        if not counts:
            raise ValueError("n is required when counts is empty")
        n = len(next(iter(counts)))
    entries = {k: v for k, v in counts.items() if v >= min_freq}
    vocab = stream.vocab
    word_ids = vocab.word_ids()
    marginals = {int(i): int(vocab.freqs[i]) for i in word_ids}
    return NgramTable(
        n=n,
        entries=entries,
        marginals=marginals,
        total_tokens=stream.total_tokens,
        word_tokens=stream.word_tokens,
        min_freq=min_freq,
    )


def extract(stream: TokenStream, n: int, min_freq: int) -> NgramTable:
    """Count and threshold in one step."""
    return build_table(count_ngrams(stream, n), stream, min_freq, n=n)


def sorted_keys(entries: dict[tuple[int, ...], int], vocab: Vocabulary) -> list[tuple[int, ...]]:
    """Keys by descending count, then lexicographic surface forms."""
    return sorted(entries, key=lambda k: (-entries[k], vocab.surfaces(k)))


def write_counts(table: NgramTable, vocab: Vocabulary, path: str, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(header + "\n")
        for key in sorted_keys(table.entries, vocab):
            fh.write(" ".join(vocab.surfaces(key)))
            fh.write(f"\t{table.entries[key]}\n")


def read_counts(path: str, vocab: Vocabulary) -> dict[tuple[int, ...], int]:
    """Read a counts file back into id-keyed counts (needs the same vocabulary)."""
    out: dict[tuple[int, ...], int] = {}
    with open(path, encoding="utf-8") as fh:
        first = True
        for lineno, line in enumerate(fh, start=1):
            if first and line.startswith(HEADER_PREFIX):
                first = False
                continue
            first = False
            line = line.rstrip("\n")
            if not line:
                continue
            gram, _, count = line.partition("\t")
            key = tuple(vocab.id_of(s) for s in gram.split(" "))
            out[key] = int(count)
    return out
