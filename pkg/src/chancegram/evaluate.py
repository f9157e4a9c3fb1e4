"""Ranking evaluation against the permutation-test gold standard.

Significant n-grams form the gold set; each association measure's ranking
is summarized by its precision-recall curve, average precision, the
random-ranking baseline (the gold proportion), and the Kappa-style
chance-corrected average precision that makes lengths comparable.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .measures import MEASURES

TIE_BREAKS = ("freq", "bytes", "score-only")


class EvalError(ValueError):
    """Invalid input to a ranking evaluation."""


@dataclass
class RankedList:
    """One measure's total ordering of the scored keys plus the gold set."""

    measure: str
    keys: list[tuple[str, ...]]
    gold: set[tuple[str, ...]]


def rank(
    rows: Sequence[tuple[tuple[str, ...], int, float]],
    measure: str,
    gold: Iterable[tuple[str, ...]],
    tie_break: str = "freq",
) -> RankedList:
    """Order keys by descending score.

    ``rows`` are (key, observed_count, score) triples.  Ties are broken by
    descending observed count then ascending key ("freq", the default), by
    ascending key alone ("bytes"), or left in input order ("score-only").
    The tie policy can matter: some measures give long runs of identical
    scores.
    """
    if tie_break not in TIE_BREAKS:
        raise EvalError(f"unknown tie_break {tie_break!r}")
    gold = set(gold)
    if tie_break == "freq":
        ordered = sorted(rows, key=lambda r: (-r[2], -r[1], r[0]))
    elif tie_break == "bytes":
        ordered = sorted(rows, key=lambda r: (-r[2], r[0]))
    else:
        ordered = sorted(rows, key=lambda r: -r[2])
    keys = [r[0] for r in ordered]
    missing = gold.difference(keys)
    if missing:
        raise EvalError(f"{len(missing)} gold keys missing from the ranking")
    return RankedList(measure=measure, keys=keys, gold=gold)


def _true_positives(ranked: RankedList) -> list[int]:
    tp = []
    running = 0
    for key in ranked.keys:
        if key in ranked.gold:
            running += 1
        tp.append(running)
    return tp


def pr_curve(ranked: RankedList, max_points: int = 2000) -> list[tuple[float, float]]:
    """(recall, precision) points from the first non-gold rank onward.

    Precision is exactly 1 before the first non-gold item, so the curve
    starts there; an all-gold ranking collapses to the single point
    (1, 1).  Long curves are thinned to ``max_points``, always keeping the
    first and last point.
    """
    if not ranked.gold:
        raise EvalError("empty gold set")
    tp = _true_positives(ranked)
    total = len(ranked.keys)
    n_gold = len(ranked.gold)
    first_miss = None
    for i, key in enumerate(ranked.keys):
        if key not in ranked.gold:
            first_miss = i
            break
    if first_miss is None:
        return [(1.0, 1.0)]
    points = [
        (tp[k] / n_gold, tp[k] / (k + 1)) for k in range(first_miss, total)
    ]
    if len(points) > max_points:
        stride = math.ceil((len(points) - 1) / (max_points - 1))
        kept = points[:-1:stride]
        kept.append(points[-1])
        points = kept
    return points


def average_precision(ranked: RankedList) -> float:
    """Mean of the precision values at the gold items' ranks."""
    if not ranked.gold:
        raise EvalError("empty gold set")
    tp = 0
    total = 0.0
    for i, key in enumerate(ranked.keys):
        if key in ranked.gold:
            tp += 1
            total += tp / (i + 1)
    return total / len(ranked.gold)


def baseline_ap(n_sig: int, n_types: int) -> float:
    """Expected AP of a random ranking: the proportion of gold items."""
    if n_types < 1:
        raise EvalError("no types to rank")
    if not 1 <= n_sig <= n_types:
        raise EvalError(f"n_sig must be in 1..{n_types}, got {n_sig}")
    return n_sig / n_types


def chance_corrected_ap(ap: float, baseline: float) -> float:
    """Kappa-style correction: (AP - baseline) / (1 - baseline).

    Undefined when the baseline is 1 (every item gold); callers should
    skip such families, as the source analysis does for 4-grams.
    """
    if baseline >= 1.0:
        raise EvalError("chance-corrected AP is undefined at baseline 1")
    return (ap - baseline) / (1.0 - baseline)


def first_reject_recall(ranked: RankedList) -> float:
    """Recall reached just before the first non-gold item (1.0 if none)."""
    if not ranked.gold:
        raise EvalError("empty gold set")
    seen = 0
    for key in ranked.keys:
        if key not in ranked.gold:
            return seen / len(ranked.gold)
        seen += 1
    return 1.0


@dataclass
class MeasureEval:
    ap: float
    ccap: float | None
    first_reject_recall: float
    pr_points: list[tuple[float, float]]


@dataclass
class LengthEval:
    n: int
    n_types: int
    n_sig: int
    baseline_ap: float
    measures: dict[str, MeasureEval] = field(default_factory=dict)


@dataclass
class EvalReport:
    lengths: dict[int, LengthEval] = field(default_factory=dict)

    def to_dict(self, config_hash: str | None = None) -> dict:
        payload: dict = {"config_hash": config_hash, "lengths": {}}
        for n in sorted(self.lengths):
            le = self.lengths[n]
            payload["lengths"][str(n)] = {
                "n_types": le.n_types,
                "n_sig": le.n_sig,
                "baseline_ap": le.baseline_ap,
                "measures": {
                    name: {
                        "ap": me.ap,
                        "ccap": me.ccap,
                        "first_reject_recall": me.first_reject_recall,
                    }
                    for name, me in sorted(le.measures.items())
                },
            }
        return payload

    def to_json(self, config_hash: str | None = None) -> str:
        return json.dumps(self.to_dict(config_hash), sort_keys=True, indent=2) + "\n"


def evaluate_length(
    scored_rows: Sequence[tuple[tuple[str, ...], int, dict[str, float]]],
    gold: set[tuple[str, ...]],
    n: int,
    tie_break: str = "freq",
    measures: Sequence[str] = MEASURES,
    max_pr_points: int = 2000,
) -> LengthEval:
    """Evaluate every measure's ranking of one length family.

    ``scored_rows`` are (key, observed, score-by-measure) triples, e.g.
    from a scores file.  A family with an empty gold set gets counts only.
    """
    n_types = len(scored_rows)
    if n_types == 0:
        raise EvalError(f"no scored {n}-grams to evaluate")
    result = LengthEval(n=n, n_types=n_types, n_sig=len(gold), baseline_ap=0.0)
    if not gold:
        return result
    result.baseline_ap = baseline_ap(len(gold), n_types)
    for m in measures:
        rows = [(key, observed, scores[m]) for key, observed, scores in scored_rows]
        ranked = rank(rows, m, gold, tie_break=tie_break)
        ap = average_precision(ranked)
        ccap = (
            chance_corrected_ap(ap, result.baseline_ap)
            if result.baseline_ap < 1.0
            else None
        )
        result.measures[m] = MeasureEval(
            ap=ap,
            ccap=ccap,
            first_reject_recall=first_reject_recall(ranked),
            pr_points=pr_curve(ranked, max_points=max_pr_points),
        )
    return result


def write_report(report: EvalReport, path: str, config_hash: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json(config_hash))


def write_pr_curves(report: EvalReport, out_dir: str) -> None:
    """One ``measure.n.csv`` per curve, rows ``recall,precision``."""
    os.makedirs(out_dir, exist_ok=True)
    for n, le in report.lengths.items():
        for name, me in le.measures.items():
            path = os.path.join(out_dir, f"{name}.{n}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("recall,precision\n")
                for recall, precision in me.pr_points:
                    fh.write(f"{recall!r},{precision!r}\n")
