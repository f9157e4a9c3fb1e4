"""Token streams and vocabularies.

A corpus is modelled as one long sequence of tokens, each classified as a
word or a non-word (punctuation, numbers, symbols).  Word surfaces are
lowercased before they enter the vocabulary; non-word surfaces are kept
verbatim and never merged by case.  The stream is the substrate both for
n-gram extraction and for random permutation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

WORD = "W"
NONWORD = "N"

# Optional first line of every file this package writes; carries run
# provenance so pipeline stages can refuse inputs from a different run.
HEADER_PREFIX = "#% chancegram"


class IngestError(ValueError):
    """Corpus input that cannot be turned into a token stream."""


@dataclass
class Vocabulary:
    """Bijection between surface forms and dense integer ids.

    Ids are assigned in first-seen order.  Each id carries its token class
    and its occurrence count over the stream it was built from.
    """

    forms: list[str]
    index: dict[str, int]
    classes: np.ndarray  # uint8 per id, 1 = word, 0 = non-word
    freqs: np.ndarray    # int64 per id, occurrences in the stream

    def __len__(self) -> int:
        return len(self.forms)

    def id_of(self, surface: str) -> int:
        try:
            return self.index[surface]
        except KeyError:
            raise KeyError(f"surface form not in vocabulary: {surface!r}") from None

    def is_word(self, token_id: int) -> bool:
        return bool(self.classes[token_id])

    def word_ids(self) -> np.ndarray:
        return np.nonzero(self.classes == 1)[0]

    def surfaces(self, key: tuple[int, ...]) -> tuple[str, ...]:
        return tuple(self.forms[i] for i in key)


@dataclass
class TokenStream:
    """The corpus as an id sequence plus its vocabulary."""

    tokens: np.ndarray  # int32 ids
    vocab: Vocabulary

    def __len__(self) -> int:
        return int(self.tokens.size)

    @property
    def total_tokens(self) -> int:
        return int(self.tokens.size)

    @property
    def word_tokens(self) -> int:
        return int(self.vocab.freqs[self.vocab.classes == 1].sum())

    def position_word_mask(self) -> np.ndarray:
        """Boolean mask over stream positions, True where the token is a word."""
        return self.vocab.classes[self.tokens] == 1


def _build(pairs: Iterable[tuple[str, str]]) -> TokenStream:
    forms: list[str] = []
    classes: list[int] = []
    freqs: list[int] = []
    index: dict[str, int] = {}
    toks: list[int] = []
    for lineno, pair in enumerate(pairs, start=1):
        try:
            surface, cls = pair
        except (TypeError, ValueError):
            raise IngestError(f"line {lineno}: expected (surface, class) pair") from None
        if cls not in (WORD, NONWORD):
            raise IngestError(f"line {lineno}: bad token class {cls!r} (want W or N)")
        if not surface or "\t" in surface or "\n" in surface:
            raise IngestError(f"line {lineno}: bad surface form {surface!r}")
        if cls == WORD:
            surface = surface.lower()
        tid = index.get(surface)
        if tid is None:
            tid = len(forms)
            index[surface] = tid
            forms.append(surface)
            classes.append(1 if cls == WORD else 0)
            freqs.append(0)
        elif classes[tid] != (1 if cls == WORD else 0):
            raise IngestError(
                f"line {lineno}: surface {surface!r} already ingested with the other class"
            )
        freqs[tid] += 1
        toks.append(tid)
    if not toks:
        raise IngestError("empty input")
    vocab = Vocabulary(
        forms=forms,
        index=index,
        classes=np.array(classes, dtype=np.uint8),
        freqs=np.array(freqs, dtype=np.int64),
    )
    return TokenStream(tokens=np.array(toks, dtype=np.int32), vocab=vocab)


def ingest_vertical(lines: Iterable[tuple[str, str]]) -> TokenStream:
    """Ingest externally tagged input, one (surface, class) pair per token.

    Class is ``"W"`` or ``"N"``.  Word surfaces are lowercased before
    vocabulary assignment; non-word surfaces are kept verbatim.  Stream
    order is preserved.
    """
    return _build(lines)


def _plain_class(token: str) -> str:
    return WORD if all(c.isalpha() or c == "'" for c in token) else NONWORD


def ingest_plain(text: str) -> TokenStream:
    """Whitespace-tokenize raw text.

    A token is a word iff, after lowercasing, it consists only of letters
    and apostrophes; everything else (digits, punctuation, mixed strings)
    is a non-word.
    """
    tokens = text.split()
    if not tokens:
        raise IngestError("empty input")
    return _build((t, _plain_class(t.lower())) for t in tokens)


def write_token_file(stream: TokenStream, path: str, header: str | None = None) -> None:
    """Write one ``surface<TAB>W|N`` line per token.  No blank lines."""
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(header + "\n")
        forms = stream.vocab.forms
        classes = stream.vocab.classes
        for tid in stream.tokens:
            fh.write(forms[tid])
            fh.write("\tW\n" if classes[tid] else "\tN\n")


def _iter_token_lines(path: str) -> Iterator[tuple[str, str]]:
    with open(path, encoding="utf-8") as fh:
        first = True
        for lineno, line in enumerate(fh, start=1):
            if first and line.startswith(HEADER_PREFIX):
                first = False
                continue
            first = False
            line = line.rstrip("\n")
            if not line:
                raise IngestError(f"line {lineno}: blank line in token file")
            parts = line.split("\t")
            if len(parts) != 2:
                raise IngestError(f"line {lineno}: expected surface<TAB>class")
            yield parts[0], parts[1]


def read_token_file(path: str) -> TokenStream:
    """Read a token file written by :func:`write_token_file`."""
    return ingest_vertical(_iter_token_lines(path))


def read_header(path: str) -> str | None:
    """Return the provenance header line of a file, if it has one."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    return first if first.startswith(HEADER_PREFIX) else None
