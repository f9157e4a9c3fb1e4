"""Lexical association measures computed from observed and expected counts.

Six measures: raw frequency f, pointwise mutual information MI, the cubed
variant MI3 (sign-corrected so under-expected n-grams sort last), the
z-score, the t-score, and the signed simple log-likelihood.  All are
functions of the observed count O and the expected count E alone; E is the
product of the component words' marginal probabilities times the corpus
size, the usual extension beyond bigrams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import HEADER_PREFIX, Vocabulary
from .ngram import NgramTable

MEASURES = ("f", "MI", "MI3", "z", "t", "simple_ll")


class MeasureError(ValueError):
    """Invalid inputs to an association measure."""


def expected_freq(table: NgramTable, key: tuple[int, ...], n_definition: str = "tokens") -> float:
    """Expected count of ``key`` under independence of its component words.

    ``n_definition`` selects the corpus size in the formula: ``"tokens"``
    uses the total token count (the permutation null mixes all tokens),
    ``"words"`` uses the word-token count only.
    """
    if n_definition == "tokens":
        size = table.total_tokens
    elif n_definition == "words":
        size = table.word_tokens
    else:
        raise MeasureError(f"unknown n_definition {n_definition!r}")
    if size <= 0:
        raise MeasureError("corpus size must be positive")
    e = float(size)
    for wid in key:
        f = table.marginals.get(wid)
        if f is None or f <= 0:
            raise MeasureError(f"no marginal frequency for word id {wid}")
        e *= f / size
    return e


def _check(o: float, e: float) -> None:
    if o < 1:
        raise MeasureError(f"observed count must be >= 1, got {o}")
    if e <= 0:
        raise MeasureError(f"expected count must be > 0, got {e}")


def mi(o: int, e: float) -> float:
    """log2(O/E); negative iff the n-gram is rarer than expected."""
    _check(o, e)
    return math.log2(o / e)


def mi3(o: int, e: float, corrected: bool = True) -> float:
    """log2(O^3/E), falling back to plain MI when O < E.

    The fallback keeps the score negative for under-expected n-grams so
    they land at the end of a ranked list; the raw cubed formula can give
    them positive scores.  Pass ``corrected=False`` for the raw formula.
    """
    _check(o, e)
    if corrected and o < e:
        return math.log2(o / e)
    return math.log2(float(o) ** 3 / e)


def z_score(o: int, e: float) -> float:
    """(O-E)/sqrt(E)."""
    _check(o, e)
    return (o - e) / math.sqrt(e)


def t_score(o: int, e: float) -> float:
    """(O-E)/sqrt(O)."""
    _check(o, e)
    return (o - e) / math.sqrt(o)


def simple_ll(o: int, e: float) -> float:
    """Signed simple log-likelihood: sign(O-E) * 2(O ln(O/E) - (O-E))."""
    _check(o, e)
    magnitude = 2.0 * (o * math.log(o / e) - (o - e))
    if o >= e:
        return magnitude
    return -magnitude


@dataclass
class ScoreRecord:
    key: tuple[int, ...]
    observed: int
    expected: float
    scores: dict[str, float]


def score_record(
    key: tuple[int, ...],
    o: int,
    e: float,
    mi3_corrected: bool = True,
) -> ScoreRecord:
    return ScoreRecord(
        key=key,
        observed=o,
        expected=e,
        scores={
            "f": float(o),
            "MI": mi(o, e),
            "MI3": mi3(o, e, corrected=mi3_corrected),
            "z": z_score(o, e),
            "t": t_score(o, e),
            "simple_ll": simple_ll(o, e),
        },
    )


def score_table(
    table: NgramTable,
    n_definition: str = "tokens",
    mi3_corrected: bool = True,
) -> list[ScoreRecord]:
    """One record per retained n-gram, all six measures filled in."""
    records = []
    for key in sorted(table.entries, key=lambda k: (-table.entries[k], k)):
        o = table.entries[key]
        e = expected_freq(table, key, n_definition=n_definition)
        records.append(score_record(key, o, e, mi3_corrected=mi3_corrected))
    return records


def write_scores(
    records: list[ScoreRecord],
    vocab: Vocabulary,
    path: str,
    header: str | None = None,
) -> None:
    """TSV: surfaces, O, E, then the six scores, 6 significant digits."""
    rows = sorted(records, key=lambda r: (-r.observed, vocab.surfaces(r.key)))
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(header + "\n")
        for r in rows:
            cells = [" ".join(vocab.surfaces(r.key)), str(r.observed), format(r.expected, ".6g")]
            cells += [format(r.scores[m], ".6g") for m in MEASURES]
            fh.write("\t".join(cells) + "\n")


def read_scores(path: str) -> list[tuple[tuple[str, ...], int, float, dict[str, float]]]:
    """Read a scores file; keys come back as surface-form tuples."""
    out = []
    with open(path, encoding="utf-8") as fh:
        first = True
        for line in fh:
            if first and line.startswith(HEADER_PREFIX):
                first = False
                continue
            first = False
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            key = tuple(cells[0].split(" "))
            o = int(cells[1])
            e = float(cells[2])
            scores = {m: float(v) for m, v in zip(MEASURES, cells[3:])}
            out.append((key, o, e, scores))
    return out
