"""Holm's sequential multiple-testing procedure.

Applied independently per n-gram length, so each length family keeps a
family-wise error rate of alpha and the families stay comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import HEADER_PREFIX, Vocabulary
from .permute import PValueTable


class MtcError(ValueError):
    """Invalid input to the multiple-testing correction."""


@dataclass
class SignificanceTable:
    """Per-key decision at level alpha within one length family."""

    n: int
    alpha: float
    family_size: int
    rows: dict[tuple, tuple[float, bool]] = field(default_factory=dict)

    def significant_keys(self) -> set:
        return {k for k, (_, sig) in self.rows.items() if sig}


def holm(pvalues: Sequence[float], alpha: float) -> list[bool]:
    """Step-down Holm decisions, in input order.

    The i-th smallest p-value is compared to alpha/(m-i+1); the walk stops
    at the first failure and everything before it is rejected.  Equal
    p-values always share a fate: thresholds only grow along the walk, so
    the stop index can never fall inside a tie group.
    """
    m = len(pvalues)
    if m < 1:
        raise MtcError("empty p-value family")
    if not 0.0 < alpha < 1.0:
        raise MtcError(f"alpha must be in (0,1), got {alpha}")
    for p in pvalues:
        if not 0.0 < p <= 1.0:
            raise MtcError(f"p-value out of range (0,1]: {p}")
    order = sorted(range(m), key=lambda i: pvalues[i])
    decisions = [False] * m
    for step, i in enumerate(order):
        if pvalues[i] > alpha / (m - step):
            break
        decisions[i] = True
    return decisions


def apply_holm(
    pvalue_tables: Mapping[int, PValueTable], alpha: float = 0.05
) -> dict[int, SignificanceTable]:
    """Run Holm within each length family separately; families never pool."""
    out = {}
    for n, pvt in pvalue_tables.items():
        if not pvt.rows:
            raise MtcError(f"empty family for {n}-grams")
        keys = sorted(pvt.rows, key=lambda k: (pvt.rows[k].p_hat, k))
        decisions = holm([pvt.rows[k].p_hat for k in keys], alpha)
        table = SignificanceTable(n=n, alpha=alpha, family_size=len(keys))
        for key, sig in zip(keys, decisions):
            table.rows[key] = (pvt.rows[key].p_hat, sig)
        out[n] = table
    return out


def write_significance(
    pvts: Mapping[int, PValueTable],
    sigs: Mapping[int, SignificanceTable],
    vocab: Vocabulary | None,
    path: str,
    header: str | None = None,
) -> None:
    """The p-values TSV with a trailing 0/1 ``significant`` column.

    ``vocab`` maps id keys to surfaces; pass None when keys already are
    surface tuples (e.g. tables read back from a file).
    """
    def surfaces(key):
        return key if vocab is None else vocab.surfaces(key)

    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(header + "\n")
        for n in sorted(pvts):
            pvt = pvts[n]
            sig = sigs[n]
            rows = sorted(
                pvt.rows.items(), key=lambda kv: (-kv[1].observed, surfaces(kv[0]))
            )
            for key, row in rows:
                flag = 1 if sig.rows[key][1] else 0
                fh.write(" ".join(surfaces(key)))
                fh.write(
                    f"\t{row.observed}\t{row.exceedances}\t{pvt.permutations}"
                    f"\t{row.p_hat!r}\t{flag}\n"
                )


def read_significance(path: str) -> dict[int, SignificanceTable]:
    """Read a significance file; keys come back as surface-form tuples."""
    families: dict[int, dict[tuple, tuple[float, bool]]] = {}
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
            if len(cells) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 tab-separated fields")
            key = tuple(cells[0].split(" "))
            families.setdefault(len(key), {})[key] = (float(cells[4]), cells[5] == "1")
    out = {}
    for n, rows in families.items():
        table = SignificanceTable(n=n, alpha=float("nan"), family_size=len(rows))
        table.rows = rows
        out[n] = table
    return out
