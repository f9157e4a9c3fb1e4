"""Independent oracles for the permutation engine.

Two ways to compute the probability a permutation test estimates: the
closed-form one-sided Fisher's exact test for 2-grams (hypergeometric
tail, computed in log space), and brute-force enumeration of all distinct
arrangements of a tiny corpus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .corpus import TokenStream


class OracleError(ValueError):
    """Invalid input to an oracle computation."""


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Fixed-margin 2x2 table for a bigram (w1, w2).

    o11 counts the bigram itself; the margins reproduce f(w1), f(w2) and
    the corpus size.
    """

    o11: int
    o12: int
    o21: int
    o22: int

    def __post_init__(self) -> None:
        for cell in (self.o11, self.o12, self.o21, self.o22):
            if cell < 0:
                raise OracleError(f"negative cell in contingency table: {self}")

    @classmethod
    def from_margins(cls, total: int, f1: int, f2: int, o11: int) -> "ContingencyTable2x2":
        return cls(o11=o11, o12=f1 - o11, o21=f2 - o11, o22=total - f1 - f2 + o11)

    @property
    def total(self) -> int:
        return self.o11 + self.o12 + self.o21 + self.o22

    @property
    def row1(self) -> int:
        return self.o11 + self.o12

    @property
    def col1(self) -> int:
        return self.o11 + self.o21


def _log_comb(n: np.ndarray | int, k: np.ndarray | int) -> np.ndarray:
    return gammaln(np.asarray(n) + 1) - gammaln(np.asarray(k) + 1) - gammaln(np.asarray(n) - np.asarray(k) + 1)


def fisher_exact_upper(table: ContingencyTable2x2) -> float:
    """One-sided upper-tail p: P(count >= o11) under fixed margins.

    Sums hypergeometric terms in log space so large corpora do not
    overflow.
    """
    n = table.total
    r1 = table.row1
    c1 = table.col1
    ks = np.arange(table.o11, min(r1, c1) + 1)
    if ks.size == 0:
        # o11 exceeds what the margins allow; the table was invalid
        raise OracleError("o11 exceeds its margins")
    log_terms = _log_comb(r1, ks) + _log_comb(n - r1, c1 - ks) - _log_comb(n, c1)
    m = log_terms.max()
    p = float(np.exp(m) * np.exp(log_terms - m).sum())
    return min(p, 1.0)


_MAX_ENUM_TOKENS = 12  # factorial guard


def _count_key(tokens: list[int], key: tuple[int, ...]) -> int:
    n = len(key)
    count = 0
    for i in range(len(tokens) - n + 1):
        if tuple(tokens[i : i + n]) == key:
            count += 1
    return count


def _distinct_arrangements(multiset: dict[int, int], size: int):
    """Yield every distinct arrangement of the multiset, in id order.

    Each distinct arrangement corresponds to the same number of raw
    orderings, so uniform weight over arrangements equals uniform weight
    over all N! orderings.
    """
    prefix: list[int] = []

    def rec():
        if len(prefix) == size:
            yield list(prefix)
            return
        for tid in multiset:
            if multiset[tid] > 0:
                multiset[tid] -= 1
                prefix.append(tid)
                yield from rec()
                prefix.pop()
                multiset[tid] += 1

    yield from rec()


def _validate_key(stream: TokenStream, key: tuple[int, ...]) -> None:
    if not 2 <= len(key) <= 4:
        raise OracleError(f"key length must be 2..4, got {len(key)}")
    for wid in key:
        if not 0 <= wid < len(stream.vocab):
            raise OracleError(f"key id {wid} not in vocabulary")
        if not stream.vocab.is_word(wid):
            raise OracleError(f"key id {wid} is not a word token")


def enumerate_exact(stream: TokenStream, key: tuple[int, ...]) -> float:
    """Exact permutation p-value by enumerating all distinct arrangements.

    Returns the proportion of arrangements of the token multiset whose
    count of ``key`` (as an uninterrupted word run) is at least the count
    observed in the stream.  Only feasible for very short streams.
    """
    return enumerate_exact_all(stream, [key])[key]


def enumerate_exact_all(
    stream: TokenStream, keys: list[tuple[int, ...]]
) -> dict[tuple[int, ...], float]:
    """Enumeration p-values for several keys in one pass over arrangements."""
    size = len(stream)
    if size > _MAX_ENUM_TOKENS:
        raise OracleError(f"stream too long to enumerate ({size} > {_MAX_ENUM_TOKENS})")
    for key in keys:
        _validate_key(stream, key)
    tokens = [int(t) for t in stream.tokens]
    observed = {key: _count_key(tokens, key) for key in keys}
    multiset: dict[int, int] = {}
    for t in tokens:
        multiset[t] = multiset.get(t, 0) + 1
    total = 0
    hits = {key: 0 for key in keys}
    for arr in _distinct_arrangements(multiset, size):
        total += 1
        for key in keys:
            if _count_key(arr, key) >= observed[key]:
                hits[key] += 1
    return {key: hits[key] / total for key in keys}
