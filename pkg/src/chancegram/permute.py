"""Monte Carlo permutation test over the token stream.

Shuffling the whole corpus (words and non-words alike) and recounting
n-grams draws one sample from the null distribution in which every
arrangement of the tokens is equally likely.  The proportion of
permutations in which an n-gram is at least as frequent as observed
estimates its exact one-sided p-value; with enough permutations this
reproduces Fisher's exact test for 2-grams and extends it to longer
n-grams, where no closed form is available.
"""

from __future__ import annotations

import hashlib
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

import numpy as np

from . import _kernel
from .corpus import HEADER_PREFIX, TokenStream, Vocabulary
from .ngram import NgramTable

ESTIMATORS = ("addone", "raw")

_SUPPORTED_LENGTHS = (2, 3, 4)


@dataclass(frozen=True)
class PermutationPlan:
    """What to run: how many permutations, from which seed, for which lengths."""

    permutations: int
    master_seed: int
    lengths: tuple[int, ...] = (2, 3)
    min_freq: int = 3

    def __post_init__(self) -> None:
        if self.permutations < 1:
            raise ValueError("permutations must be >= 1")
        if not self.lengths:
            raise ValueError("lengths must be non-empty")
        for n in self.lengths:
            if n not in _SUPPORTED_LENGTHS:
                raise ValueError(f"unsupported n-gram length {n}")


@dataclass
class TallyTable:
    """Per-key exceedance counts r after ``permutations`` completed shuffles."""

    exceedances: dict[int, dict[tuple[int, ...], int]]
    permutations: int


class PValueRow(NamedTuple):
    observed: int
    exceedances: int
    p_hat: float


@dataclass
class PValueTable:
    """Estimated p-values for one n-gram length."""

    n: int
    permutations: int
    estimator: str
    rows: dict[tuple, PValueRow] = field(default_factory=dict)


def shuffle_stream(stream: TokenStream, master_seed: int, perm_index: int) -> np.ndarray:
    """Uniformly random arrangement of the stream's ids, fixed by (seed, index)."""
    return _kernel.shuffle_ids(stream.tokens, master_seed, perm_index)


def tally_permutation(
    permuted: np.ndarray,
    vocab: Vocabulary,
    tables: Mapping[int, NgramTable],
) -> dict[int, dict[tuple[int, ...], int]]:
    """Count observed keys in a permuted sequence (reference implementation).

    Counting follows the same word-run rule as extraction: a non-word
    token interrupts every window.  Keys absent from the permuted
    sequence come back with count 0.  The compiled engine in :func:`run`
    is tested against this.
    """
    is_word = vocab.classes
    out: dict[int, dict[tuple[int, ...], int]] = {}
    for n, table in tables.items():
        counts = {key: 0 for key in table.entries}
        run = 0
        for i in range(permuted.size):
            tid = int(permuted[i])
            if not is_word[tid]:
                run = 0
                continue
            run += 1
            if run >= n:
                key = tuple(int(t) for t in permuted[i - n + 1 : i + 1])
                if key in counts:
                    counts[key] += 1
        out[n] = counts
    return out


def p_value(r: int, permutations: int, estimator: str = "addone") -> float:
    """Estimate the p-value from the exceedance count.

    ``addone`` returns (r+1)/(P+1), which can never be zero and counts the
    observed corpus as one arrangement; ``raw`` returns the literal
    proportion r/P.
    """
    if not 0 <= r <= permutations:
        raise ValueError(f"exceedance count {r} outside [0, {permutations}]")
    if permutations < 1:
        raise ValueError("permutations must be >= 1")
    if estimator == "addone":
        return (r + 1) / (permutations + 1)
    if estimator == "raw":
        return r / permutations
    raise ValueError(f"unknown estimator {estimator!r}")


def pvalue_tables(
    tally: TallyTable,
    tables: Mapping[int, NgramTable],
    estimator: str = "addone",
) -> dict[int, PValueTable]:
    """Attach observed counts and p-value estimates to a tally."""
    out = {}
    for n, exceed in tally.exceedances.items():
        pvt = PValueTable(n=n, permutations=tally.permutations, estimator=estimator)
        observed = tables[n].entries
        for key, r in exceed.items():
            pvt.rows[key] = PValueRow(
                observed=observed[key],
                exceedances=r,
                p_hat=p_value(r, tally.permutations, estimator),
            )
        out[n] = pvt
    return out


class _PackedLength:
    """Kernel-ready view of one observed table: sorted packed keys + probe arrays."""

    def __init__(self, table: NgramTable, lut: np.ndarray, w_base: int):
        keys = list(table.entries)
        packed_unsorted = _kernel.pack_keys(
            [tuple(int(lut[i]) for i in key) for key in keys], w_base, table.n
        )
        order = np.argsort(packed_unsorted, kind="stable")
        self.keys = [keys[i] for i in order.tolist()]
        self.packed = packed_unsorted[order]
        self.observed = np.array(
            [table.entries[k] for k in self.keys], dtype=np.int32
        )
        self.slot_keys, self.slot_rows = _kernel.build_probe_table(self.packed)


def _plan_signature(
    stream: TokenStream, plan: PermutationPlan, packed: dict[int, _PackedLength]
) -> str:
    h = hashlib.sha256()
    h.update(
        f"seed={plan.master_seed} P={plan.permutations} "
        f"lengths={','.join(map(str, plan.lengths))} min_freq={plan.min_freq}".encode()
    )
    h.update(np.ascontiguousarray(stream.tokens).tobytes())
    for n in sorted(packed):
        h.update(f"n={n}".encode())
        h.update(packed[n].packed.tobytes())
        h.update(packed[n].observed.tobytes())
    return h.hexdigest()


def _save_checkpoint(path: str, signature: str, completed: int, r: dict[int, np.ndarray]) -> None:
    tmp = path + ".tmp"
    arrays = {f"r{n}": arr for n, arr in r.items()}
    np.savez(tmp, signature=np.array(signature), completed=np.array(completed), **arrays)
    # np.savez appends .npz to names without it
    produced = tmp if tmp.endswith(".npz") else tmp + ".npz"
    os.replace(produced, path)


def _load_checkpoint(path: str, signature: str, r: dict[int, np.ndarray]) -> int:
    with np.load(path) as ck:
        if str(ck["signature"]) != signature:
            raise ValueError(
                f"checkpoint {path} belongs to a different run; refusing to resume"
            )
        completed = int(ck["completed"])
        for n in r:
            r[n][:] = ck[f"r{n}"]
    return completed


def run(
    stream: TokenStream,
    plan: PermutationPlan,
    tables: Mapping[int, NgramTable],
    workers: int = 1,
    checkpoint_path: str | None = None,
    checkpoint_every: int | None = None,
    progress: bool | Callable[[int, int, float], None] = False,
) -> TallyTable:
    """Tally, for every observed n-gram, how many of P random permutations
    of the stream contain it at least as often as the original corpus.

    The result depends only on (stream, plan): workers split the index
    range but per-index random streams and associative merging make the
    tally identical for any worker count.  With ``checkpoint_path`` set,
    partial tallies are saved every ``checkpoint_every`` permutations and
    an interrupted run resumes exactly.
    """
    for n in plan.lengths:
        if n not in tables:
            raise ValueError(f"no observed table for length {n}")
    if stream.tokens.size >= 2**32:
        raise ValueError("streams of 2^32 tokens or more are not supported")
    if workers < 1:
        raise ValueError("workers must be >= 1")

    vocab = stream.vocab
    word_ids = vocab.word_ids()
    w_base = max(int(word_ids.size), 1)
    lut = np.full(len(vocab), -1, np.int32)
    lut[word_ids] = np.arange(word_ids.size, dtype=np.int32)
    compact = lut[stream.tokens]

    packed = {n: _PackedLength(tables[n], lut, w_base) for n in plan.lengths}
    r = {n: np.zeros(packed[n].observed.size, np.int64) for n in plan.lengths}

    signature = _plan_signature(stream, plan, packed)
    start = 0
    if checkpoint_path and os.path.exists(checkpoint_path):
        start = _load_checkpoint(checkpoint_path, signature, r)

    kernel_args = {}
    for n in (2, 3, 4):
        if n in packed:
            p = packed[n]
            kernel_args[n] = (p.slot_keys, p.slot_rows, p.observed)
        else:
            kernel_args[n] = _kernel.empty_length()

    def tally_span(i0: int, i1: int):
        return _kernel._tally_range(
            compact,
            plan.master_seed,
            i0,
            i1,
            w_base,
            *kernel_args[2],
            *kernel_args[3],
            *kernel_args[4],
        )

    total = plan.permutations
    chunk = checkpoint_every if (checkpoint_path and checkpoint_every) else total - start
    chunk = max(chunk, 1)
    report = progress if callable(progress) else None
    t0 = time.monotonic()
    done_since_t0 = 0

    pos = start
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while pos < total:
            end = min(pos + chunk, total)
            span = end - pos
            sub = max(32, -(-span // (workers * 4)))
            futures = []
            lo = pos
            while lo < end:
                hi = min(lo + sub, end)
                futures.append(pool.submit(tally_span, lo, hi))
                lo = hi
            for fut in futures:
                r2, r3, r4 = fut.result()
                for n, rn in ((2, r2), (3, r3), (4, r4)):
                    if n in r:
                        r[n] += rn
            pos = end
            done_since_t0 += span
            if checkpoint_path:
                _save_checkpoint(checkpoint_path, signature, pos, r)
            rate = done_since_t0 / max(time.monotonic() - t0, 1e-9)
            if report is not None:
                report(pos, total, rate)
            elif progress:
                print(
                    f"permtest: {pos}/{total} permutations ({rate:.0f}/s)",
                    file=sys.stderr,
                    flush=True,
                )

    exceedances: dict[int, dict[tuple[int, ...], int]] = {}
    for n in plan.lengths:
        rn = r[n]
        # an artificial observed count of 0 is exceeded by every permutation
        zero = packed[n].observed == 0
        if zero.any():
            rn = rn.copy()
            rn[zero] = total
        exceedances[n] = {key: int(v) for key, v in zip(packed[n].keys, rn.tolist())}
    return TallyTable(exceedances=exceedances, permutations=total)


def write_pvalues(
    pvts: Mapping[int, PValueTable],
    vocab: Vocabulary,
    path: str,
    header: str | None = None,
) -> None:
    """TSV: surfaces, O, r, P, p_hat.  Lengths are mixed; row arity tells them apart."""
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(header + "\n")
        for n in sorted(pvts):
            pvt = pvts[n]
            rows = sorted(
                pvt.rows.items(),
                key=lambda kv: (-kv[1].observed, vocab.surfaces(kv[0])),
            )
            for key, row in rows:
                fh.write(" ".join(vocab.surfaces(key)))
                fh.write(f"\t{row.observed}\t{row.exceedances}\t{pvt.permutations}\t{row.p_hat!r}\n")


def read_pvalues(path: str) -> dict[int, PValueTable]:
    """Read a p-values file; keys come back as surface-form tuples."""
    out: dict[int, PValueTable] = {}
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
            cells = line.split("\t")
            if len(cells) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 tab-separated fields")
            key = tuple(cells[0].split(" "))
            n = len(key)
            observed, r, permutations = int(cells[1]), int(cells[2]), int(cells[3])
            pvt = out.get(n)
            if pvt is None:
                pvt = out[n] = PValueTable(n=n, permutations=permutations, estimator="file")
            pvt.rows[key] = PValueRow(observed, r, float(cells[4]))
    return out
